#include "epscope/spectral_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "epscope/rng.hpp"

namespace epscope {

std::string to_string(SpacingLaw law) {
  switch (law) {
    case SpacingLaw::Wigner: return "wigner";
    case SpacingLaw::Poisson: return "poisson";
    default: return "neither";
  }
}

double ks_distance(std::vector<double> values, double (*cdf)(double)) {
  if (values.empty()) throw StatisticsError("KS needs a nonempty sample");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = cdf(values[i]);
    d = std::max(d, (static_cast<double>(i) + 1.0) / n - f);
    d = std::max(d, f - static_cast<double>(i) / n);
  }
  return d;
}

double ks_uniform_angles(std::vector<double> alphas) {
  if (alphas.empty()) throw StatisticsError("KS needs a nonempty sample");
  std::sort(alphas.begin(), alphas.end());
  const double n = static_cast<double>(alphas.size());
  double d = 0.0;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const double f = (alphas[i] + std::numbers::pi) / (2.0 * std::numbers::pi);
    d = std::max(d, (static_cast<double>(i) + 1.0) / n - f);
    d = std::max(d, f - static_cast<double>(i) / n);
  }
  return d;
}

RadialHistogram radial_histogram(std::vector<double> values, Index n_bins,
                                 std::optional<std::pair<double, double>>
                                     fit_range,
                                 double wedge_width) {
  values.erase(std::remove_if(values.begin(), values.end(),
                              [](double v) { return !(v > 0.0) || !std::isfinite(v); }),
               values.end());
  if (values.size() < 50) throw StatisticsError("too few radii to histogram");
  if (n_bins < 8) throw ParameterError("need at least 8 bins");

  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front(), hi = sorted.back();
  if (!(hi > lo)) throw StatisticsError("degenerate radius sample");

  RadialHistogram h;
  h.edges.resize(n_bins + 1);
  const double llo = std::log(lo), lhi = std::log(hi * (1 + 1e-12));
  for (Index b = 0; b <= n_bins; ++b)
    h.edges[b] = std::exp(llo + (lhi - llo) * static_cast<double>(b) /
                                    static_cast<double>(n_bins));
  h.counts = Eigen::VectorXi::Zero(n_bins);
  for (double v : values) {
    Index b = static_cast<Index>((std::log(v) - llo) / (lhi - llo) *
                                 static_cast<double>(n_bins));
    b = std::clamp<Index>(b, 0, n_bins - 1);
    ++h.counts[b];
  }
  h.n_samples = static_cast<Index>(values.size());
  h.density_r.resize(n_bins);
  h.density_area.resize(n_bins);
  for (Index b = 0; b < n_bins; ++b) {
    const double width = h.edges[b + 1] - h.edges[b];
    h.density_r[b] = h.counts[b] / (static_cast<double>(h.n_samples) * width);
    const double area =
        0.5 * wedge_width * (h.edges[b + 1] * h.edges[b + 1] - h.edges[b] * h.edges[b]);
    h.density_area[b] = h.counts[b] / (static_cast<double>(h.n_samples) * area);
  }

  double flo, fhi;
  if (fit_range) {
    flo = fit_range->first;
    fhi = fit_range->second;
  } else {
    flo = sorted[static_cast<std::size_t>(0.70 * (sorted.size() - 1))];
    fhi = 10.0 * flo;
  }
  h.fit_lo = flo;
  h.fit_hi = fhi;

  std::vector<double> xs, ys;
  for (Index b = 0; b < n_bins; ++b) {
    const double mid = std::sqrt(h.edges[b] * h.edges[b + 1]);
    if (mid < flo || mid > fhi || h.counts[b] < 10) continue;
    xs.push_back(std::log(mid));
    ys.push_back(std::log(h.density_r[b]));
  }
  if (xs.size() < 5)
    throw StatisticsError("fit window has fewer than 5 usable bins");
  const double m = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = m * sxx - sx * sx;
  if (!(denom > 0)) throw StatisticsError("degenerate abscissa in fit window");
  const double slope = (m * sxy - sx * sy) / denom;
  const double icept = (sy - slope * sx) / m;
  double ss_res = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - slope * xs[i] - icept;
    ss_res += r * r;
  }
  h.fitted_exponent = slope;
  h.fit_stderr = xs.size() > 2
                     ? std::sqrt(ss_res / (m - 2.0) / (sxx - sx * sx / m))
                     : 0.0;
  return h;
}

RadialHistogram intersection_distribution(const EnsembleSpec& spec, Index n_bins) {
  if (spec.n_real < 50)
    throw StatisticsError("intersection law needs >= 50 realizations");
  std::vector<double> radii;
  for (Index j = 0; j < spec.n_real; ++j) {
    const PencilParams params = sample_params(
        spec.dim, spec.angle_window, spec.seed, static_cast<std::uint64_t>(j));
    for (const auto& x : unperturbed_intersections(params).points)
      radii.push_back(std::abs(x.lambda));
  }
  return radial_histogram(std::move(radii), n_bins);
}

RadialHistogram ep_radial_distribution(
    const std::vector<ExceptionalPoint>& eps, Index n_bins,
    std::optional<std::pair<double, double>> wedge) {
  std::vector<double> radii;
  double wedge_width = 2 * std::numbers::pi;
  for (const auto& ep : eps) {
    if (wedge) {
      const double a = std::arg(ep.lambda_c);
      if (a < wedge->first || a > wedge->second) continue;
    }
    radii.push_back(std::abs(ep.lambda_c));
  }
  if (wedge) wedge_width = wedge->second - wedge->first;
  return radial_histogram(std::move(radii), n_bins, std::nullopt, wedge_width);
}

AngularReport angular_isotropy(const std::vector<ExceptionalPoint>& eps) {
  AngularReport report;
  for (const auto& ep : eps) report.alphas.push_back(std::arg(ep.lambda_c));
  report.n = static_cast<Index>(report.alphas.size());
  if (report.n < 200)
    throw StatisticsError("isotropy needs >= 200 pooled EPs");
  report.isotropy_stat = ks_uniform_angles(report.alphas);
  return report;
}

SpacingSample unfolded_spacings(const EnsembleSpec& spec, double lambda_star,
                                double center_fraction) {
  if (!(center_fraction > 0.0) || center_fraction > 1.0)
    throw ParameterError("center_fraction must lie in (0, 1]");
  if (!std::isfinite(lambda_star))
    throw ParameterError("lambda_star must be finite and real");
  const Index n = spec.dim;
  const Index keep0 = static_cast<Index>(
      std::floor(static_cast<double>(n) * (1.0 - center_fraction) / 2.0));
  const Index kept = n - 2 * keep0;
  if (kept < 4)
    throw ParameterError("center_fraction selects fewer than 4 levels");

  constexpr int kUnfoldDegree = 7;
  SpacingSample out;
  out.lambda_star = lambda_star;
  out.center_fraction = center_fraction;
  out.n_realizations = spec.n_real;
  for (Index j = 0; j < spec.n_real; ++j) {
    const MatrixPencil pencil = build_pencil(sample_params(
        spec.dim, spec.angle_window, spec.seed, static_cast<std::uint64_t>(j)));
    const Mat h = pencil.h0 + lambda_star * pencil.h1;
    Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw NumericalError("symmetric eigensolver failed");
    const Vec ev = es.eigenvalues();  // ascending
    // staircase fit N(E_i) = i + 1/2 with a degree-7 polynomial on [-1, 1]
    const double e_lo = ev[0], e_hi = ev[n - 1];
    const double half = 0.5 * (e_hi - e_lo);
    if (!(half > 0)) continue;
    Mat vand(n, kUnfoldDegree + 1);
    for (Index i = 0; i < n; ++i) {
      const double x = (ev[i] - e_lo) / half - 1.0;
      double p = 1.0;
      for (int d = 0; d <= kUnfoldDegree; ++d) {
        vand(i, d) = p;
        p *= x;
      }
    }
    Vec stair(n);
    for (Index i = 0; i < n; ++i) stair[i] = static_cast<double>(i) + 0.5;
    const Vec coef = vand.colPivHouseholderQr().solve(stair);
    const Vec unfolded = vand * coef;
    for (Index i = keep0; i + 1 < n - keep0; ++i)
      out.spacings.push_back(unfolded[i + 1] - unfolded[i]);
  }
  if (out.spacings.empty()) throw StatisticsError("no spacings pooled");
  double mean = 0.0;
  for (double s : out.spacings) mean += s;
  mean /= static_cast<double>(out.spacings.size());
  out.raw_mean = mean;
  if (!(mean > 0)) throw NumericalError("unfolding produced nonpositive mean");
  for (double& s : out.spacings) s /= mean;
  return out;
}

SpacingVerdict fit_spacing_law(const SpacingSample& sample) {
  if (sample.spacings.size() < 1000)
    throw StatisticsError("spacing verdict needs >= 1000 spacings");
  SpacingVerdict v;
  v.ks_wigner = ks_distance(sample.spacings, [](double s) {
    return 1.0 - std::exp(-std::numbers::pi * s * s / 4.0);
  });
  v.ks_poisson =
      ks_distance(sample.spacings, [](double s) { return 1.0 - std::exp(-s); });
  const double best = std::min(v.ks_wigner, v.ks_poisson);
  if (best >= 0.05)
    v.verdict = SpacingLaw::Neither;
  else
    v.verdict = v.ks_wigner <= v.ks_poisson ? SpacingLaw::Wigner
                                            : SpacingLaw::Poisson;
  return v;
}

std::vector<SweepRow> fan_out_sweep(Index dim, Index n_real,
                                    const std::vector<double>& angle_windows,
                                    std::uint64_t seed, int workers) {
  (void)workers;
  if (angle_windows.empty()) throw ParameterError("sweep needs >= 1 window");
  for (std::size_t i = 1; i < angle_windows.size(); ++i)
    if (angle_windows[i] < angle_windows[i - 1])
      throw ParameterError("sweep windows must ascend");

  std::vector<SweepRow> rows;
  for (std::size_t w = 0; w < angle_windows.size(); ++w) {
    const std::uint64_t sub_seed = SplitMix64(seed, 0xABCD + w).next_u64();
    SweepRow row;
    row.angle_window = angle_windows[w];

    EnsembleSpec spec{dim, n_real, angle_windows[w], sub_seed};
    std::vector<ExceptionalPoint> pool;
    for (Index j = 0; j < n_real; ++j) {
      const MatrixPencil pencil = build_pencil(
          sample_params(dim, angle_windows[w], sub_seed, static_cast<std::uint64_t>(j)));
      EpList located = locate_eps(pencil);
      pool.insert(pool.end(), located.points.begin(), located.points.end());
    }
    row.isotropy_stat = angular_isotropy(pool).isotropy_stat;
    row.radial_exponent = ep_radial_distribution(pool, 48).fitted_exponent;

    const SpacingSample sp = unfolded_spacings(spec, 1.0, 0.6);
    const SpacingVerdict sv = fit_spacing_law(sp);
    row.ks_wigner = sv.ks_wigner;
    row.ks_poisson = sv.ks_poisson;
    row.verdict = sv.verdict;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace epscope
