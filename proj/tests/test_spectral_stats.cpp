#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "epscope/ep_locator.hpp"
#include "epscope/matrix_model.hpp"
#include "epscope/rng.hpp"
#include "epscope/spectral_stats.hpp"

using namespace epscope;

TEST_CASE("radial fit: synthetic 1/x^2 oracle pins the fitter") {
  // x drawn from density ~ x^-2 on [1, 10] by inverse CDF
  SplitMix64 rng(1);
  std::vector<double> x(200000);
  for (auto& v : x) v = 1.0 / (1.0 - 0.9 * rng.next_unit());
  const RadialHistogram h = radial_histogram(std::move(x), 48);
  CHECK(std::abs(h.fitted_exponent + 2.0) <= 0.1);
}

TEST_CASE("radial histogram conserves counts and density mass") {
  SplitMix64 rng(2);
  std::vector<double> x(5000);
  for (auto& v : x) v = std::exp(rng.next_symmetric(2.0));
  const std::size_t n_in = x.size();
  const RadialHistogram h = radial_histogram(std::move(x), 32);
  CHECK(static_cast<std::size_t>(h.counts.sum()) == n_in);
  double mass = 0;
  for (Index b = 0; b < h.counts.size(); ++b)
    mass += h.density_r[b] * (h.edges[b + 1] - h.edges[b]);
  CHECK(std::abs(mass - 1.0) <= 1e-12);
}

TEST_CASE("radial fit refuses degenerate inputs") {
  CHECK_THROWS_AS(radial_histogram({1.0, 2.0, 3.0}, 16), StatisticsError);
  std::vector<double> constant(500, 2.5);
  CHECK_THROWS_AS(radial_histogram(std::move(constant), 16), StatisticsError);
  // a single N=2 realization gives one intersection: far too few
  CHECK_THROWS_AS(intersection_distribution({2, 1, 0.0, 5}, 16),
                  StatisticsError);
}

TEST_CASE("intersection law: N=12 ensemble fits -2") {
  const RadialHistogram h = intersection_distribution({12, 200, 0.0, 42}, 48);
  CHECK(std::abs(h.fitted_exponent + 2.0) <= 0.2);
}

TEST_CASE("KS distance validates itself against synthetic laws") {
  // sample exactly from the Wigner surmise: s = sqrt(-(4/pi) ln u)
  SplitMix64 rng(3);
  std::vector<double> s(20000);
  for (auto& v : s)
    v = std::sqrt(-(4.0 / std::numbers::pi) *
                  std::log(1.0 - rng.next_unit()));
  const double ks = ks_distance(s, [](double t) {
    return 1.0 - std::exp(-std::numbers::pi * t * t / 4.0);
  });
  // 99% band for the true generating law
  CHECK(ks <= 1.63 / std::sqrt(20000.0));

  std::vector<double> e(20000);
  for (auto& v : e) v = -std::log(1.0 - rng.next_unit());
  const double ksp =
      ks_distance(e, [](double t) { return 1.0 - std::exp(-t); });
  CHECK(ksp <= 1.63 / std::sqrt(20000.0));
}

TEST_CASE("angular isotropy: exact grid is nearly zero, too few throws") {
  std::vector<ExceptionalPoint> eps(2048);
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const double a = -std::numbers::pi +
                     2 * std::numbers::pi * (i + 0.5) / eps.size();
    eps[i].lambda_c = std::polar(1.0, a);
  }
  const AngularReport rep = angular_isotropy(eps);
  CHECK(rep.isotropy_stat <= 1.0 / eps.size() + 1e-12);
  eps.resize(100);
  CHECK_THROWS_AS(angular_isotropy(eps), StatisticsError);
}

TEST_CASE("angular isotropy: tiny angle window clusters on the axis") {
  std::vector<ExceptionalPoint> pool;
  for (std::uint64_t j = 0; j < 40; ++j) {
    const auto p = build_pencil(sample_params(4, 0.01, 2222, j));
    const auto located = locate_eps(p);
    pool.insert(pool.end(), located.points.begin(), located.points.end());
  }
  REQUIRE(pool.size() >= 200);
  CHECK(angular_isotropy(pool).isotropy_stat > 0.2);
}

TEST_CASE("unfolded spacings: mean is 1 and windows behave") {
  const EnsembleSpec spec{40, 60, std::numbers::pi, 99};
  const SpacingSample s = unfolded_spacings(spec, 1.0, 0.6);
  CHECK(s.spacings.size() >= 1000);
  CHECK(std::abs(s.raw_mean - 1.0) <= 0.02);
  double mean = 0;
  for (double v : s.spacings) mean += v;
  mean /= static_cast<double>(s.spacings.size());
  CHECK(mean == doctest::Approx(1.0).epsilon(1e-12));
  for (double v : s.spacings) CHECK(v >= 0.0);

  CHECK_THROWS_AS(unfolded_spacings(spec, 1.0, 0.0), ParameterError);
  CHECK_THROWS_AS(unfolded_spacings({4, 5, 0.0, 1}, 1.0, 0.5), ParameterError);
}

TEST_CASE("spacing verdicts at the window extremes") {
  const SpacingSample poisson =
      unfolded_spacings({40, 60, 0.0, 123}, 1.0, 0.6);
  const SpacingVerdict vp = fit_spacing_law(poisson);
  CHECK(vp.verdict == SpacingLaw::Poisson);
  CHECK(vp.ks_poisson < 0.05);

  const SpacingSample wigner =
      unfolded_spacings({40, 60, std::numbers::pi, 123}, 1.0, 0.6);
  const SpacingVerdict vw = fit_spacing_law(wigner);
  CHECK(vw.verdict == SpacingLaw::Wigner);
  CHECK(vw.ks_wigner < 0.05);

  SpacingSample tiny;
  tiny.spacings.assign(100, 1.0);
  CHECK_THROWS_AS(fit_spacing_law(tiny), StatisticsError);
}

TEST_CASE("synthetic wigner sample gets the wigner verdict") {
  SplitMix64 rng(4);
  SpacingSample s;
  s.spacings.resize(5000);
  for (auto& v : s.spacings)
    v = std::sqrt(-(4.0 / std::numbers::pi) * std::log(1.0 - rng.next_unit()));
  const SpacingVerdict v = fit_spacing_law(s);
  CHECK(v.verdict == SpacingLaw::Wigner);
  CHECK(v.ks_wigner < 0.03);
  CHECK(v.ks_poisson > 0.15);
}

TEST_CASE("ep radial distribution over a pooled N=6 ensemble") {
  std::vector<ExceptionalPoint> pool;
  for (std::uint64_t j = 0; j < 30; ++j) {
    const auto p = build_pencil(sample_params(6, std::numbers::pi, 777, j));
    const auto located = locate_eps(p);
    pool.insert(pool.end(), located.points.begin(), located.points.end());
  }
  REQUIRE(pool.size() >= 850);  // 30 x 30 when every pencil resolves fully
  const RadialHistogram h = ep_radial_distribution(pool, 40);
  CHECK(h.fitted_exponent < -1.4);
  CHECK(h.fitted_exponent > -2.8);
  // wedge variant only uses in-wedge points
  const RadialHistogram hw = ep_radial_distribution(
      pool, 40, std::make_pair(0.0, std::numbers::pi));
  CHECK(hw.n_samples < h.n_samples);
}

TEST_CASE("fan_out_sweep: structure on a small ensemble") {
  const auto rows = fan_out_sweep(3, 600, {0.05, std::numbers::pi}, 31415);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].isotropy_stat >= rows[1].isotropy_stat);
  CHECK_THROWS_AS(fan_out_sweep(3, 10, {0.3, 0.1}, 1), ParameterError);
}
