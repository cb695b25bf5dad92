#include "epscope/ep_locator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace epscope {

namespace {

constexpr double kDedupRel = 1e-8;      // separates double roots from noise
constexpr double kGapTol = 1e-6;        // coalescence certificate
constexpr double kLeadingTol = 1e-12;   // degenerate-pencil detection

Index next_pow2(Index m) {
  Index p = 1;
  while (p < m) p *= 2;
  return p;
}

CVec eigenvalues_at(const MatrixPencil& pencil, Cplx lambda) {
  Eigen::ComplexEigenSolver<CMat> es(evaluate(pencil, lambda), false);
  if (es.info() != Eigen::Success)
    throw NumericalError("eigensolver failed at lambda");
  return es.eigenvalues();
}

struct PairGap {
  double gap;
  Index i, j;
};

PairGap min_gap_pair(const CVec& mu) {
  PairGap best{std::numeric_limits<double>::infinity(), 0, 1};
  for (Index i = 0; i < mu.size(); ++i)
    for (Index j = i + 1; j < mu.size(); ++j) {
      const double g = std::abs(mu[i] - mu[j]);
      if (g < best.gap) best = {g, i, j};
    }
  return best;
}

// Scaled discriminant samples D(lambda)/s^{N(N-1)} on a circle; the common
// scale s keeps the product of N(N-1) squared gaps inside double range.
CVec scaled_disc_samples(const MatrixPencil& pencil, double rho, Index m_samples,
                         double* scale_out) {
  const double s = std::max(
      1.0, pencil.params.eps.cwiseAbs().maxCoeff() +
               rho * pencil.params.omega.cwiseAbs().maxCoeff());
  CVec vals(m_samples);
  for (Index m = 0; m < m_samples; ++m) {
    const double th =
        2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(m_samples);
    const CVec mu = eigenvalues_at(pencil, rho * Cplx(std::cos(th), std::sin(th)));
    Cplx d = 1.0;
    for (Index i = 0; i < mu.size(); ++i)
      for (Index j = i + 1; j < mu.size(); ++j) {
        const Cplx g = (mu[i] - mu[j]) / s;
        d *= g * g;
      }
    vals[m] = d;
  }
  if (scale_out) *scale_out = s;
  return vals;
}

// Inverse DFT of conjugate-symmetrized circle samples; returns coefficients
// of the polynomial in z = lambda/rho, ascending, length deg+1.
CVec circle_to_coeffs(CVec vals, Index deg) {
  const Index m_samples = vals.size();
  for (Index m = 1; m < m_samples / 2; ++m) {
    const Index mm = m_samples - m;
    const Cplx avg = 0.5 * (vals[m] + std::conj(vals[mm]));
    vals[m] = avg;
    vals[mm] = std::conj(avg);
  }
  vals[0] = Cplx(vals[0].real(), 0.0);
  vals[m_samples / 2] = Cplx(vals[m_samples / 2].real(), 0.0);
  CVec coeffs(deg + 1);
  for (Index k = 0; k <= deg; ++k) {
    Cplx acc = 0.0;
    for (Index j = 0; j < m_samples; ++j) {
      const double th = -2.0 * std::numbers::pi * static_cast<double>(k) *
                        static_cast<double>(j) / static_cast<double>(m_samples);
      acc += vals[j] * Cplx(std::cos(th), std::sin(th));
    }
    coeffs[k] = acc / static_cast<double>(m_samples);
  }
  return coeffs;
}

// Parlett-Reinsch balancing (powers of 2), then Schur eigenvalues.
CVec companion_roots(const CVec& ascending) {
  Index deg = ascending.size() - 1;
  const double mx = ascending.cwiseAbs().maxCoeff();
  if (mx <= 0.0) return CVec(0);
  while (deg > 0 && std::abs(ascending[deg]) < 1e-13 * mx) --deg;
  if (deg < 1) return CVec(0);
  CMat comp = CMat::Zero(deg, deg);
  for (Index i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  for (Index i = 0; i < deg; ++i)
    comp(i, deg - 1) = -ascending[i] / ascending[deg];
  // balance
  const Index n = deg;
  bool converged = false;
  while (!converged) {
    converged = true;
    for (Index i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(comp(j, i));
        r += std::abs(comp(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double f = 1.0;
      const double s = c + r;
      while (c < r / 2.0) {
        c *= 2.0;
        r /= 2.0;
        f *= 2.0;
      }
      while (c >= r * 2.0) {
        c /= 2.0;
        r *= 2.0;
        f /= 2.0;
      }
      if (c + r < 0.95 * s) {
        converged = false;
        comp.col(i) *= f;
        comp.row(i) /= f;
      }
    }
  }
  Eigen::ComplexEigenSolver<CMat> es(comp, false);
  if (es.info() != Eigen::Success)
    throw NumericalError("companion eigensolver failed");
  return es.eigenvalues();
}

struct RefineOutcome {
  Cplx lambda;
  Cplx energy;
  double residual;
  bool converged;
  bool near_degenerate;
};

// Newton on (e, z) against the interpolated table, then a short polish with
// f-values from eigenvalue products of the pencil itself so the final lambda
// does not depend on which table seeded it.
RefineOutcome refine_against_table(const MatrixPencil& pencil,
                                   const CharPolyTable& table, Cplx e0,
                                   Cplx lambda0, double tol) {
  constexpr int kMaxIter = 50;
  Cplx e = table.from_energy(e0);
  Cplx z = table.from_lambda(lambda0);
  Cplx best_e = e, best_z = z;
  double best_r = std::numeric_limits<double>::infinity();
  for (int it = 0; it <= kMaxIter; ++it) {
    const auto ev = table.eval(e, z);
    const double r =
        std::max(std::abs(ev.p) / std::max(ev.scale_p, 1e-300),
                 std::abs(ev.p_e) / std::max(ev.scale_pe, 1e-300));
    if (r < best_r) {
      best_r = r;
      best_e = e;
      best_z = z;
    }
    if (it == kMaxIter) break;
    const Cplx det = ev.p_e * ev.p_ez - ev.p_z * ev.p_ee;
    if (std::abs(det) < 1e-300) break;
    const Cplx de = (-ev.p * ev.p_ez + ev.p_e * ev.p_z) / det;
    const Cplx dz = (-ev.p_e * ev.p_e + ev.p * ev.p_ee) / det;
    e += de;
    z += dz;
    const double step = std::max(std::abs(de) / std::max(std::abs(e), 1e-3),
                                 std::abs(dz) / std::max(std::abs(z), 1e-3));
    if (step < 1e-15 && best_r <= tol) break;
  }
  e = best_e;
  z = best_z;
  bool near_degenerate = false;
  {
    const auto ev = table.eval(e, z);
    const Cplx det = ev.p_e * ev.p_ez - ev.p_z * ev.p_ee;
    const double jnorm = std::abs(ev.p_e) + std::abs(ev.p_z) +
                         std::abs(ev.p_ee) + std::abs(ev.p_ez);
    near_degenerate =
        std::abs(det) < 1e-300 || jnorm * jnorm / std::abs(det) > 1e14;
  }

  // eigenvalue-product polish (table supplies the Jacobian only)
  const Index n = pencil.dim();
  Cplx lambda = table.to_lambda(z);
  Cplx energy = table.to_energy(e);
  for (int it = 0; it < 4; ++it) {
    const CVec mu = eigenvalues_at(pencil, lambda);
    const double sg = table.sigma();
    CVec d(n);
    for (Index i = 0; i < n; ++i) d[i] = (energy - mu[i]) / sg;
    Cplx f1 = 1.0;
    for (Index i = 0; i < n; ++i) f1 *= d[i];
    CVec pref(n + 1), suf(n + 1);
    pref[0] = 1.0;
    suf[n] = 1.0;
    for (Index i = 0; i < n; ++i) pref[i + 1] = pref[i] * d[i];
    for (Index i = n - 1; i >= 0; --i) suf[i] = suf[i + 1] * d[i];
    Cplx f2 = 0.0;
    for (Index j = 0; j < n; ++j) f2 += pref[j] * suf[j + 1];
    const auto ev = table.eval(table.from_energy(energy), table.from_lambda(lambda));
    const Cplx det = ev.p_e * ev.p_ez - ev.p_z * ev.p_ee;
    if (std::abs(det) < 1e-300) break;
    const Cplx de = (-f1 * ev.p_ez + f2 * ev.p_z) / det;
    const Cplx dz = (-f2 * ev.p_e + f1 * ev.p_ee) / det;
    energy = table.to_energy(table.from_energy(energy) + de);
    lambda = table.to_lambda(table.from_lambda(lambda) + dz);
    if (std::abs(dz) * table.rho() < 1e-15 * std::max(std::abs(lambda), 1e-9))
      break;
  }
  const auto ev = table.eval(table.from_energy(energy), table.from_lambda(lambda));
  const double r =
      std::max(std::abs(ev.p) / std::max(ev.scale_p, 1e-300),
               std::abs(ev.p_e) / std::max(ev.scale_pe, 1e-300));
  return {lambda, energy, std::min(r, best_r), std::min(r, best_r) <= tol,
          near_degenerate};
}

}  // namespace

double spectral_diameter(const CVec& mu) {
  double d = 0.0;
  for (Index i = 0; i < mu.size(); ++i)
    for (Index j = i + 1; j < mu.size(); ++j)
      d = std::max(d, std::abs(mu[i] - mu[j]));
  return d;
}

double gap_scale(const MatrixPencil& pencil, Cplx lambda, const CVec& mu) {
  const auto& p = pencil.params;
  const double base = (p.eps.maxCoeff() - p.eps.minCoeff()) +
                      std::abs(lambda) * (p.omega.maxCoeff() - p.omega.minCoeff());
  return std::max(spectral_diameter(mu), base);
}

double default_build_radius(const PencilParams& params) {
  const auto set = unperturbed_intersections(params);
  double log_sum = 0.0;
  Index count = 0;
  for (const auto& x : set.points) {
    const double a = std::abs(x.lambda);
    if (a > 0.0 && std::isfinite(a)) {
      log_sum += std::log(a);
      ++count;
    }
  }
  if (count == 0) return 1.0;
  return std::clamp(std::exp(log_sum / static_cast<double>(count)), 1e-2, 1e2);
}

Cplx DiscriminantPoly::value(Cplx lambda) const {
  Cplx acc = 0.0;
  for (Index k = coeffs.size() - 1; k >= 0; --k) acc = acc * lambda + coeffs[k];
  return acc;
}

DiscriminantPoly discriminant_poly(const MatrixPencil& pencil, double radius) {
  const Index n = pencil.dim();
  const Index deg = n * (n - 1);
  const double rho = radius > 0.0 ? radius : default_build_radius(pencil.params);
  const Index m_samples = next_pow2(2 * (deg + 1));
  double s = 1.0;
  const CVec vals = scaled_disc_samples(pencil, rho, m_samples, &s);
  CVec z_coeffs = circle_to_coeffs(vals, deg);

  const double mx = z_coeffs.cwiseAbs().maxCoeff();
  if (!(mx > 0.0) || std::abs(z_coeffs[deg]) < kLeadingTol * mx)
    throw NumericalError(
        "discriminant degree collapsed: repeated omega values make the "
        "pencil degenerate");

  DiscriminantPoly out;
  out.dim = static_cast<Index>(n);
  out.build_radius = rho;
  out.coeffs.resize(deg + 1);
  // undo the z- and s-scalings: c_k = b_k * s^{N(N-1)} / rho^k
  const double log_s = std::log(s);
  for (Index k = 0; k <= deg; ++k) {
    const double f = std::exp(static_cast<double>(deg) * log_s -
                              static_cast<double>(k) * std::log(rho));
    out.coeffs[k] = Cplx(z_coeffs[k].real() * f, 0.0);
  }

  // consistency probe at off-grid points
  for (const double frac : {0.63, 1.37}) {
    const Cplx probe = rho * frac * std::polar(1.0, 0.53);
    const CVec mu = eigenvalues_at(pencil, probe);
    Cplx direct = 1.0;
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) {
        const Cplx g = (mu[i] - mu[j]) / s;
        direct *= g * g;
      }
    // compare in the scaled variable to stay in range
    Cplx interp = 0.0;
    const Cplx zp = probe / rho;
    for (Index k = deg; k >= 0; --k) interp = interp * zp + z_coeffs[k];
    double ref = 0.0;
    Cplx zp_pow = 1.0;
    for (Index k = 0; k <= deg; ++k) {
      ref += std::abs(z_coeffs[k]) * std::abs(zp_pow);
      zp_pow *= zp;
    }
    if (std::abs(interp - direct) > 1e-8 * std::max(ref, std::abs(direct)))
      throw NumericalError(
          "discriminant interpolation residual above tolerance at |lambda|=" +
          std::to_string(std::abs(probe)));
  }
  return out;
}

ExceptionalPoint refine_ep(const MatrixPencil& pencil, Cplx lambda0, Cplx e0,
                           double tol) {
  if (!is_finite(lambda0) || !is_finite(e0))
    throw ParameterError("refine_ep seed must be finite");
  const double rho = std::clamp(std::abs(lambda0), 1e-3, 1e6);
  CharPolyTable table(pencil, rho);
  const auto out = refine_against_table(pencil, table, e0, lambda0, tol);
  if (!out.converged)
    throw NumericalError(
        "refine_ep did not converge: residual " + std::to_string(out.residual) +
        " at lambda = (" + std::to_string(out.lambda.real()) + ", " +
        std::to_string(out.lambda.imag()) + ")");
  ExceptionalPoint ep;
  ep.lambda_c = out.lambda;
  ep.energy_c = out.energy;
  ep.residual = out.residual;
  ep.near_degenerate = out.near_degenerate;
  const CVec mu = eigenvalues_at(pencil, out.lambda);
  const auto pg = min_gap_pair(mu);
  ep.energy_c = 0.5 * (mu[pg.i] + mu[pg.j]);
  ep.coalescence_gap = pg.gap / gap_scale(pencil, out.lambda, mu);
  return ep;
}

EpList locate_eps(const MatrixPencil& pencil, double tol, int workers) {
  (void)workers;  // candidate refinement is cheap enough sequentially; the
                  // ordering below is canonical either way
  const Index n = pencil.dim();
  const Index expected = n * (n - 1);
  const double rho0 = default_build_radius(pencil.params);

  static constexpr double kMults[] = {1.0,   0.1,  10.0,  0.01,  100.0, 0.3,
                                      3.0,   30.0, 300.0, 1000.0, 0.03};
  std::map<int, CharPolyTable> tables;
  auto table_at = [&](int mult_idx) -> const CharPolyTable& {
    auto it = tables.find(mult_idx);
    if (it == tables.end())
      it = tables.emplace(mult_idx, CharPolyTable(pencil, rho0 * kMults[mult_idx]))
               .first;
    return it->second;
  };
  auto home_index = [&](double lam_abs) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < static_cast<int>(std::size(kMults)); ++i) {
      const double d = std::abs(std::log(std::max(lam_abs, 1e-12) / (rho0 * kMults[i])));
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  };

  EpList list;
  auto try_seed = [&](Cplx lambda0, Cplx e_hint, bool have_hint) -> bool {
    const auto& table = table_at(home_index(std::abs(lambda0)));
    Cplx e0 = e_hint;
    if (!have_hint) {
      const CVec mu = eigenvalues_at(pencil, lambda0);
      const auto pg = min_gap_pair(mu);
      e0 = 0.5 * (mu[pg.i] + mu[pg.j]);
    }
    const auto out = refine_against_table(pencil, table, e0, lambda0, tol);
    if (!out.converged) return false;
    const CVec mu = eigenvalues_at(pencil, out.lambda);
    const auto pg = min_gap_pair(mu);
    const double gs = gap_scale(pencil, out.lambda, mu);
    if (pg.gap > kGapTol * gs) return false;  // not a coalescence point
    for (auto& q : list.points) {
      const double scale =
          std::max({std::abs(out.lambda), std::abs(q.lambda_c), 1e-30});
      // genuinely coincident roots at a (near-)diabolic point carry a
      // singular Newton Jacobian, which widens the refinement noise floor
      const double merge_radius = (out.near_degenerate && q.near_degenerate)
                                      ? 1e-5 * scale
                                      : kDedupRel * scale;
      if (std::abs(out.lambda - q.lambda_c) <= merge_radius) {
        ++list.duplicates_collapsed;
        ++q.multiplicity;
        return false;
      }
    }
    ExceptionalPoint ep;
    ep.lambda_c = out.lambda;
    ep.energy_c = 0.5 * (mu[pg.i] + mu[pg.j]);
    ep.residual = out.residual;
    ep.coalescence_gap = pg.gap / gs;
    ep.near_degenerate = out.near_degenerate;
    list.points.push_back(ep);
    return true;
  };

  auto closure_complete = [&]() {
    if (static_cast<Index>(list.points.size()) != expected) return false;
    for (const auto& p : list.points) {
      const Cplx want = std::conj(p.lambda_c);
      double dmin = std::numeric_limits<double>::infinity();
      for (const auto& q : list.points)
        dmin = std::min(dmin, std::abs(q.lambda_c - want));
      if (dmin > 1e-9 * std::max(std::abs(want), 1e-30)) return false;
    }
    return true;
  };

  bool degenerate_seen = false;
  std::string degenerate_msg;
  for (int mi = 0; mi < static_cast<int>(std::size(kMults)); ++mi) {
    if (closure_complete()) break;
    const double rho = rho0 * kMults[mi];
    if (rho < 1e-6 || rho > 1e7) continue;
    const Index m_samples = next_pow2(2 * (expected + 1));
    CVec vals;
    try {
      vals = scaled_disc_samples(pencil, rho, m_samples, nullptr);
    } catch (const NumericalError&) {
      continue;
    }
    if (!vals.allFinite()) continue;
    const CVec z_coeffs = circle_to_coeffs(vals, expected);
    const double mx = z_coeffs.cwiseAbs().maxCoeff();
    if (!(mx > 0.0)) continue;
    if (mi == 0 && std::abs(z_coeffs[expected]) < kLeadingTol * mx) {
      degenerate_seen = true;
      degenerate_msg =
          "discriminant degree collapsed at the base radius: repeated omega "
          "values make the pencil degenerate";
    }
    const CVec roots = companion_roots(z_coeffs);
    for (Index k = 0; k < roots.size(); ++k) {
      const double az = std::abs(roots[k]);
      if (az < 0.05 || az > 20.0 || !is_finite(roots[k])) continue;
      try_seed(roots[k] * rho, Cplx(0, 0), false);
    }
  }
  if (degenerate_seen && list.points.empty()) throw NumericalError(degenerate_msg);

  // conjugate closure: a located point whose mirror is missing seeds it
  for (int round = 0; round < 3; ++round) {
    bool added = false;
    const auto snapshot = list.points;
    for (const auto& p : snapshot) {
      const Cplx want = std::conj(p.lambda_c);
      double dmin = std::numeric_limits<double>::infinity();
      for (const auto& q : list.points)
        dmin = std::min(dmin, std::abs(q.lambda_c - want) /
                                  std::max(std::abs(want), 1e-30));
      if (dmin > 1e-9)
        added = try_seed(want, std::conj(p.energy_c), true) || added;
    }
    if (!added) break;
  }

  std::sort(list.points.begin(), list.points.end(),
            [](const ExceptionalPoint& a, const ExceptionalPoint& b) {
              if (a.lambda_c.real() != b.lambda_c.real())
                return a.lambda_c.real() < b.lambda_c.real();
              return a.lambda_c.imag() < b.lambda_c.imag();
            });
  // link conjugate partners
  for (int i = 0; i < static_cast<int>(list.points.size()); ++i) {
    const Cplx want = std::conj(list.points[i].lambda_c);
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int j = 0; j < static_cast<int>(list.points.size()); ++j) {
      const double d = std::abs(list.points[j].lambda_c - want);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    if (best >= 0 &&
        best_d <= 1e-8 * std::max(std::abs(want), 1e-30) * 10.0)
      list.points[i].conjugate_partner = best;
  }
  return list;
}

std::pair<Cplx, Cplx> two_level_ep(double eps1, double eps2, double omega1,
                                   double omega2, double phi) {
  if (omega1 == omega2)
    throw ParameterError("two-level pencil with equal slopes has no EP");
  const double base = -(eps1 - eps2) / (omega1 - omega2);
  return {base * std::polar(1.0, 2.0 * phi), base * std::polar(1.0, -2.0 * phi)};
}

}  // namespace epscope
