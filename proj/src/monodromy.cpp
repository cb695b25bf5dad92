#include "epscope/monodromy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "epscope/assignment.hpp"

namespace epscope {

namespace {

struct EigPair {
  CVec mu;
  CMat vec;
};

EigPair eig_sorted(const MatrixPencil& pencil, Cplx lambda) {
  Eigen::ComplexEigenSolver<CMat> es(evaluate(pencil, lambda), true);
  if (es.info() != Eigen::Success)
    throw NumericalError("eigensolver failed along path");
  const Index n = es.eigenvalues().size();
  std::vector<int> order(n);
  for (Index i = 0; i < n; ++i) order[i] = static_cast<int>(i);
  const CVec mu = es.eigenvalues();
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (mu[a].real() != mu[b].real()) return mu[a].real() < mu[b].real();
    return mu[a].imag() < mu[b].imag();
  });
  EigPair out;
  out.mu.resize(n);
  out.vec.resize(n, n);
  for (Index i = 0; i < n; ++i) {
    out.mu[i] = mu[order[i]];
    out.vec.col(i) = es.eigenvectors().col(order[i]);
  }
  return out;
}

// unit phase making the largest-magnitude component real positive
void canonical_phase(CMat& frame) {
  for (Index k = 0; k < frame.cols(); ++k) {
    Index imax = 0;
    frame.col(k).cwiseAbs().maxCoeff(&imax);
    const Cplx piv = frame(imax, k);
    if (std::abs(piv) > 0.0) frame.col(k) *= std::conj(piv) / std::abs(piv);
    frame.col(k).normalize();
  }
}

}  // namespace

void LambdaPath::validate() const {
  if (samples.size() < 8) throw ParameterError("path needs >= 8 samples");
  for (const auto& s : samples)
    if (!is_finite(s)) throw ParameterError("path samples must be finite");
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (samples[i] == samples[i - 1])
      throw ParameterError("consecutive path samples must be distinct");
}

LambdaPath circle_path(Cplx center, double radius, int turns, int direction,
                       int base_per_turn) {
  if (turns < 1) throw ParameterError("turns must be >= 1");
  if (radius <= 0) throw ParameterError("radius must be positive");
  if (direction != 1 && direction != -1)
    throw ParameterError("direction must be +1 or -1");
  std::vector<Cplx> base(base_per_turn);
  for (int i = 0; i < base_per_turn; ++i) {
    const double th = 2.0 * std::numbers::pi * direction * i / base_per_turn;
    base[i] = center + radius * Cplx(std::cos(th), std::sin(th));
  }
  LambdaPath path;
  path.closed = true;
  path.samples.reserve(static_cast<std::size_t>(base_per_turn) * turns + 1);
  for (int t = 0; t < turns; ++t)
    for (int i = 0; i < base_per_turn; ++i) path.samples.push_back(base[i]);
  path.samples.push_back(base[0]);
  return path;
}

LambdaPath segment_path(Cplx from, Cplx to, int n_samples) {
  if (n_samples < 2) throw ParameterError("segment needs >= 2 samples");
  LambdaPath path;
  path.samples.resize(n_samples);
  for (int i = 0; i < n_samples; ++i)
    path.samples[i] =
        from + (to - from) * (static_cast<double>(i) / (n_samples - 1));
  return path;
}

SheetTrace track_spectrum(const MatrixPencil& pencil, const LambdaPath& path) {
  path.validate();
  const Index n = pencil.dim();
  SheetTrace trace;

  EigPair cur = eig_sorted(pencil, path.samples[0]);
  canonical_phase(cur.vec);
  trace.samples.push_back(path.samples[0]);
  trace.energies.push_back(cur.mu);
  trace.frames.push_back(cur.vec);

  // attempt one continuation step; returns false when the assignment is
  // ambiguous and the segment should be bisected
  auto attempt = [&](Cplx target, EigPair& next) -> bool {
    EigPair cand = eig_sorted(pencil, target);
    Eigen::MatrixXd cost(n, n);
    for (Index j = 0; j < n; ++j)
      for (Index k = 0; k < n; ++k)
        cost(j, k) = std::abs(cur.mu[j] - cand.mu[k]);
    const std::vector<int> match = min_cost_assignment(cost);
    for (Index j = 0; j < n; ++j) {
      const int kj = match[static_cast<std::size_t>(j)];
      const double dj = cost(j, kj);
      double second = std::numeric_limits<double>::infinity();
      double gap = std::numeric_limits<double>::infinity();
      for (Index k = 0; k < n; ++k) {
        if (k == kj) continue;
        second = std::min(second, cost(j, k));
        gap = std::min(gap, std::abs(cand.mu[k] - cand.mu[kj]));
      }
      if (n > 1 && (dj > 0.5 * second || dj > 0.5 * gap)) return false;
    }
    next.mu.resize(n);
    next.vec.resize(n, n);
    for (Index j = 0; j < n; ++j) {
      const int kj = match[static_cast<std::size_t>(j)];
      next.mu[j] = cand.mu[kj];
      CVec v = cand.vec.col(kj);
      const Cplx overlap = cur.vec.col(j).adjoint() * v;
      if (std::abs(overlap) < 0.5) return false;  // frame rotated too far
      v *= std::conj(overlap) / std::abs(overlap);
      next.vec.col(j) = v.normalized();
    }
    return true;
  };

  for (std::size_t seg = 1; seg < path.samples.size(); ++seg) {
    std::vector<std::pair<Cplx, int>> stack;
    stack.emplace_back(path.samples[seg], 0);
    while (!stack.empty()) {
      auto [target, depth] = stack.back();
      stack.pop_back();
      EigPair next;
      if (attempt(target, next)) {
        cur = std::move(next);
        trace.samples.push_back(target);
        trace.energies.push_back(cur.mu);
        trace.frames.push_back(cur.vec);
        continue;
      }
      if (depth >= 20)
        throw NumericalError(
            "branch tracking failed to disambiguate near lambda = (" +
            std::to_string(target.real()) + ", " + std::to_string(target.imag()) +
            "): path passes too close to an exceptional point");
      const Cplx mid = 0.5 * (trace.samples.back() + target);
      ++trace.step_subdivisions;
      stack.emplace_back(target, depth + 1);
      stack.emplace_back(mid, depth + 1);
    }
  }
  return trace;
}

int winding_number(const std::vector<Cplx>& samples, Cplx point) {
  double total = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const Cplx a = samples[i - 1] - point;
    const Cplx b = samples[i] - point;
    total += std::arg(b / a);
  }
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

namespace {

// Bilinear-normalized frames w = v / sqrt(v^T v) with the square-root sign
// propagated along the branch; returns per-branch start and end vectors.
void c_gauge_endpoints(const SheetTrace& trace, CMat& w_start, CMat& w_end) {
  const Index n = trace.n_branches();
  const std::size_t T = trace.frames.size();
  w_start.resize(n, n);
  w_end.resize(n, n);
  for (Index j = 0; j < n; ++j) {
    CVec prev;
    for (std::size_t t = 0; t < T; ++t) {
      const CVec& f = trace.frames[t].col(j);
      const Cplx c2 = (f.transpose() * f).value();
      if (std::abs(c2) < 1e-12)
        throw NumericalError(
            "branch became self-orthogonal along the path (loop too close "
            "to an exceptional point)");
      CVec w = f / std::sqrt(c2);
      if (t > 0) {
        const Cplx ov = (w.transpose() * prev).value();
        if (ov.real() < 0.0) w = -w;
      } else {
        w_start.col(j) = w;
      }
      prev = w;
    }
    w_end.col(j) = prev;
  }
}

}  // namespace

LoopReport loop_monodromy(const MatrixPencil& pencil, const ExceptionalPoint& ep,
                          double radius, int direction, int turns,
                          const std::vector<ExceptionalPoint>* located) {
  const LambdaPath path = circle_path(ep.lambda_c, radius, turns, direction);
  const SheetTrace trace = track_spectrum(pencil, path);
  const Index n = trace.n_branches();

  LoopReport report;
  // permutation from final-vs-initial energies (same matrix, so distances
  // are machine-small for the matching branch)
  Eigen::MatrixXd cost(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index k = 0; k < n; ++k)
      cost(j, k) = std::abs(trace.energies.back()[j] - trace.energies.front()[k]);
  report.permutation = min_cost_assignment(cost);

  CMat w_start, w_end;
  c_gauge_endpoints(trace, w_start, w_end);
  report.phase_factors.resize(n);
  for (Index j = 0; j < n; ++j) {
    const int target = report.permutation[static_cast<std::size_t>(j)];
    report.phase_factors[j] =
        (w_start.col(target).transpose() * w_end.col(j)).value();
  }

  EpList fallback;
  const std::vector<ExceptionalPoint>* eps_all = located;
  if (!eps_all) {
    fallback = locate_eps(pencil);
    eps_all = &fallback.points;
  }
  for (int i = 0; i < static_cast<int>(eps_all->size()); ++i)
    if (winding_number(trace.samples, (*eps_all)[i].lambda_c) != 0)
      report.enclosed_eps.push_back(i);
  report.multi_ep_warning = report.enclosed_eps.size() > 1;
  return report;
}

CrossingReport crossing_scan(const MatrixPencil& pencil,
                             const ExceptionalPoint& ep, double offset,
                             const std::vector<ExceptionalPoint>* located) {
  const Cplx lc = ep.lambda_c;
  if (!(offset > 0.0) || offset >= std::abs(lc.imag()))
    throw ParameterError("offset must satisfy 0 < offset < |Im lambda_c|");
  const double span = 5.0 * offset;

  EpList fallback;
  const std::vector<ExceptionalPoint>* eps_all = located;
  if (!eps_all) {
    fallback = locate_eps(pencil);
    eps_all = &fallback.points;
  }
  for (const auto& other : *eps_all) {
    if (std::abs(other.lambda_c - lc) <
        1e-9 * std::max(std::abs(lc), 1.0))
      continue;
    if (std::abs(other.lambda_c.real() - lc.real()) <= span &&
        std::abs(other.lambda_c.imag() - lc.imag()) <= offset)
      throw ConfigurationError(
          "another exceptional point lies inside the scan rectangle");
  }

  CrossingReport report;
  report.offset = offset;
  report.span = span;

  const int half_samples = 81;
  for (int side = 0; side < 2; ++side) {
    const double y = lc.imag() + (side == 0 ? offset : -offset);
    const Cplx anchor(lc.real(), y);

    // identify the coalescing pair at the anchor (nearest the EP)
    Eigen::ComplexEigenSolver<CMat> es(evaluate(pencil, anchor), false);
    if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed");
    CVec mu0 = es.eigenvalues();
    std::vector<int> order(mu0.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return std::abs(mu0[a] - ep.energy_c) < std::abs(mu0[b] - ep.energy_c);
    });

    // track outward from the anchor in both directions, then stitch
    std::vector<Cplx> lams, diffs;
    for (int dir = -1; dir <= 1; dir += 2) {
      const Cplx end(lc.real() + dir * span, y);
      const SheetTrace tr =
          track_spectrum(pencil, segment_path(anchor, end, half_samples));
      // branch indices of the pair in the sorted frame at the anchor
      Eigen::MatrixXd cost(2, tr.n_branches());
      for (int r = 0; r < 2; ++r)
        for (Index k = 0; k < tr.n_branches(); ++k)
          cost(r, k) = std::abs(mu0[order[r]] - tr.energies.front()[k]);
      Index b0 = 0, b1 = 0;
      cost.row(0).minCoeff(&b0);
      cost.row(1).minCoeff(&b1);
      std::vector<Cplx> l_leg, d_leg;
      for (std::size_t t = 0; t < tr.samples.size(); ++t) {
        l_leg.push_back(tr.samples[t]);
        d_leg.push_back(tr.energies[t][b0] - tr.energies[t][b1]);
      }
      if (dir < 0) {
        std::reverse(l_leg.begin(), l_leg.end());
        std::reverse(d_leg.begin(), d_leg.end());
        lams = std::move(l_leg);
        diffs = std::move(d_leg);
      } else {
        lams.insert(lams.end(), l_leg.begin() + 1, l_leg.end());
        diffs.insert(diffs.end(), d_leg.begin() + 1, d_leg.end());
      }
    }

    CrossingLeg leg;
    for (std::size_t t = 1; t < diffs.size(); ++t) {
      if (diffs[t - 1].real() * diffs[t].real() < 0.0) leg.real_part_crosses = true;
      if (diffs[t - 1].imag() * diffs[t].imag() < 0.0) leg.imag_part_crosses = true;
    }
    if (side == 0) {
      report.above = leg;
      report.lambda_above = lams;
      report.diff_above = diffs;
    } else {
      report.below = leg;
      report.lambda_below = lams;
      report.diff_below = diffs;
    }
  }
  return report;
}

}  // namespace epscope
