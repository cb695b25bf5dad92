#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "epscope/core.hpp"
#include "epscope/ep_locator.hpp"
#include "epscope/matrix_model.hpp"

namespace epscope {

struct EnsembleSpec {
  Index dim = 2;
  Index n_real = 1;
  double angle_window = 0.0;
  std::uint64_t seed = 0;
};

// Log-binned radial histogram with a power-law fit over a one-decade window
// in the tail (the small-radius region deviates for finite samples, so the
// window starts at the 70th-percentile radius unless overridden).
struct RadialHistogram {
  Vec edges;          // n_bins + 1, log-spaced over the data range
  Eigen::VectorXi counts;
  Vec density_r;      // per unit radius per sample
  Vec density_area;   // per unit annulus (or wedge) area per sample
  double fitted_exponent = 0.0;
  double fit_stderr = 0.0;
  double fit_lo = 0.0, fit_hi = 0.0;
  Index n_samples = 0;  // in-range sample count
};

struct AngularReport {
  std::vector<double> alphas;  // in (-pi, pi]
  double isotropy_stat = 1.0;  // KS distance to the uniform angular law
  Index n = 0;
};

struct SpacingSample {
  std::vector<double> spacings;  // normalized to mean 1
  double raw_mean = 0.0;         // pooled mean before normalization
  double lambda_star = 0.0;
  double center_fraction = 0.0;
  Index n_realizations = 0;
};

enum class SpacingLaw { Wigner, Poisson, Neither };

struct SpacingVerdict {
  double ks_wigner = 1.0;
  double ks_poisson = 1.0;
  SpacingLaw verdict = SpacingLaw::Neither;
};

struct SweepRow {
  double angle_window = 0.0;
  double isotropy_stat = 1.0;
  double radial_exponent = 0.0;
  double ks_wigner = 1.0;
  double ks_poisson = 1.0;
  SpacingLaw verdict = SpacingLaw::Neither;
};

std::string to_string(SpacingLaw law);

// KS distance of a sample against a continuous CDF given as callable.
double ks_distance(std::vector<double> values, double (*cdf)(double));
double ks_uniform_angles(std::vector<double> alphas);

RadialHistogram radial_histogram(std::vector<double> values, Index n_bins,
                                 std::optional<std::pair<double, double>>
                                     fit_range = std::nullopt,
                                 double wedge_width = 2 * 3.14159265358979323846);

// |lambda_{i,k}| pooled over the ensemble (angles are irrelevant here:
// intersections depend only on the spectra).
RadialHistogram intersection_distribution(const EnsembleSpec& spec, Index n_bins);

RadialHistogram ep_radial_distribution(
    const std::vector<ExceptionalPoint>& eps, Index n_bins,
    std::optional<std::pair<double, double>> wedge = std::nullopt);

AngularReport angular_isotropy(const std::vector<ExceptionalPoint>& eps);

SpacingSample unfolded_spacings(const EnsembleSpec& spec, double lambda_star,
                                double center_fraction);

SpacingVerdict fit_spacing_law(const SpacingSample& sample);

std::vector<SweepRow> fan_out_sweep(Index dim, Index n_real,
                                    const std::vector<double>& angle_windows,
                                    std::uint64_t seed, int workers = 1);

}  // namespace epscope
