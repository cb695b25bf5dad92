#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "epscope/ep_locator.hpp"
#include "epscope/matrix_model.hpp"
#include "epscope/monodromy.hpp"
#include "epscope/rng.hpp"

using namespace epscope;

namespace {

MatrixPencil pencil_2x2(double phi) {
  PencilParams p;
  p.eps = Eigen::Vector2d(1, 2);
  p.omega = Eigen::Vector2d(2, 1);
  p.angles = Vec::Constant(1, phi);
  return build_pencil(p);
}

bool is_identity(const std::vector<int>& perm) {
  for (std::size_t i = 0; i < perm.size(); ++i)
    if (perm[i] != static_cast<int>(i)) return false;
  return true;
}

std::vector<int> swapped_indices(const std::vector<int>& perm) {
  std::vector<int> moved;
  for (std::size_t i = 0; i < perm.size(); ++i)
    if (perm[i] != static_cast<int>(i)) moved.push_back(static_cast<int>(i));
  return moved;
}

void check_trace_identity(const MatrixPencil& pencil, const SheetTrace& tr) {
  const Cplx tr0 = pencil.h0.trace();
  const Cplx tr1 = pencil.h1.trace();
  for (std::size_t t = 0; t < tr.samples.size(); ++t) {
    const Cplx want = tr0 + tr.samples[t] * tr1;
    const Cplx got = tr.energies[t].sum();
    CHECK(std::abs(got - want) <= 1e-9 * std::max(1.0, std::abs(want)));
  }
}

void check_eigen_residuals(const MatrixPencil& pencil, const SheetTrace& tr) {
  for (std::size_t t = 0; t < tr.samples.size(); t += 7) {
    const CMat h = evaluate(pencil, tr.samples[t]);
    const double diam = spectral_diameter(tr.energies[t]);
    for (Index k = 0; k < tr.n_branches(); ++k) {
      const double r =
          (h * tr.frames[t].col(k) - tr.energies[t][k] * tr.frames[t].col(k))
              .norm();
      CHECK(r <= 1e-8 * std::max(diam, 1e-12));
    }
  }
}

}  // namespace

TEST_CASE("path validation") {
  LambdaPath p;
  p.samples = {Cplx(0, 0), Cplx(1, 0)};
  CHECK_THROWS_AS(p.validate(), ParameterError);  // too few
  p.samples = std::vector<Cplx>(9, Cplx(0, 0));
  CHECK_THROWS_AS(p.validate(), ParameterError);  // repeats
  CHECK_THROWS_AS(circle_path(Cplx(0, 0), -1.0, 1, 1), ParameterError);
  CHECK_THROWS_AS(circle_path(Cplx(0, 0), 1.0, 0, 1), ParameterError);
  CHECK_THROWS_AS(circle_path(Cplx(0, 0), 1.0, 1, 2), ParameterError);
}

TEST_CASE("track_spectrum: near-constant loop acts trivially") {
  // stand-in for the fixed-lambda case (paths require distinct samples):
  // a tiny circle in an EP-free region
  const auto p = pencil_2x2(std::numbers::pi / 4);
  const LambdaPath path = circle_path(Cplx(0.2, 0.1), 1e-6, 1, 1);
  const SheetTrace tr = track_spectrum(p, path);
  check_trace_identity(p, tr);
  Eigen::MatrixXd cost(2, 2);
  for (Index j = 0; j < 2; ++j)
    for (Index k = 0; k < 2; ++k)
      cost(j, k) = std::abs(tr.energies.back()[j] - tr.energies.front()[k]);
  CHECK(cost(0, 0) < cost(0, 1));
  CHECK(cost(1, 1) < cost(1, 0));
}

TEST_CASE("track_spectrum: small loop enclosing no EP is trivial") {
  // brute-force derived case: random N=4 pencil, loop inside an EP-free disk
  const auto p = build_pencil(sample_params(4, std::numbers::pi, 606, 0));
  const auto located = locate_eps(p);
  // base point between EPs: grid-search a point far from all of them
  Cplx best(0, 0);
  double best_d = -1.0;
  for (double x = -2; x <= 2; x += 0.25) {
    for (double y = -2; y <= 2; y += 0.25) {
      double dmin = std::numeric_limits<double>::infinity();
      for (const auto& ep : located.points)
        dmin = std::min(dmin, std::abs(Cplx(x, y) - ep.lambda_c));
      if (dmin > best_d) {
        best_d = dmin;
        best = Cplx(x, y);
      }
    }
  }
  REQUIRE(best_d > 0.1);
  ExceptionalPoint fake;
  fake.lambda_c = best;  // loop helper centers on this point
  const LoopReport rep =
      loop_monodromy(p, fake, 0.4 * best_d, +1, 1, &located.points);
  CHECK(is_identity(rep.permutation));
  for (Index i = 0; i < rep.phase_factors.size(); ++i)
    CHECK(std::abs(rep.phase_factors[i] - Cplx(1, 0)) < 1e-6);
  CHECK(rep.enclosed_eps.empty());
}

TEST_CASE("loop_monodromy: 2x2 four-cycle") {
  const auto p = pencil_2x2(std::numbers::pi / 4);
  const auto located = locate_eps(p);
  const auto& ep = located.points[1];  // +i
  REQUIRE(ep.lambda_c.imag() > 0);

  const LoopReport one = loop_monodromy(p, ep, 0.5, +1, 1, &located.points);
  CHECK(swapped_indices(one.permutation).size() == 2);
  CHECK(std::abs(one.phase_factors[0] * one.phase_factors[1] + Cplx(1, 0)) <
        1e-6);

  const LoopReport two = loop_monodromy(p, ep, 0.5, +1, 2, &located.points);
  CHECK(is_identity(two.permutation));
  CHECK(std::abs(two.phase_factors[0] + Cplx(1, 0)) < 1e-6);
  CHECK(std::abs(two.phase_factors[1] + Cplx(1, 0)) < 1e-6);

  const LoopReport four = loop_monodromy(p, ep, 0.5, +1, 4, &located.points);
  CHECK(is_identity(four.permutation));
  CHECK(std::abs(four.phase_factors[0] - Cplx(1, 0)) < 1e-6);
  CHECK(std::abs(four.phase_factors[1] - Cplx(1, 0)) < 1e-6);

  const LoopReport rev = loop_monodromy(p, ep, 0.5, -1, 1, &located.points);
  const LoopReport fwd3 = loop_monodromy(p, ep, 0.5, +1, 3, &located.points);
  CHECK(rev.permutation == fwd3.permutation);
  for (Index i = 0; i < 2; ++i)
    CHECK(std::abs(rev.phase_factors[i] - fwd3.phase_factors[i]) < 1e-6);

  CHECK(one.enclosed_eps == std::vector<int>{1});
  CHECK_FALSE(one.multi_ep_warning);
}

TEST_CASE("loop_monodromy: homotopy invariance in the radius") {
  const auto p = build_pencil(sample_params(4, std::numbers::pi, 808, 2));
  const auto located = locate_eps(p);
  REQUIRE(located.points.size() == 12);
  // pick the EP with the largest clearance
  int pick = -1;
  double clearance = -1;
  for (int i = 0; i < 12; ++i) {
    double dmin = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 12; ++j)
      if (j != i)
        dmin = std::min(dmin, std::abs(located.points[i].lambda_c -
                                       located.points[j].lambda_c));
    if (dmin > clearance) {
      clearance = dmin;
      pick = i;
    }
  }
  const auto& ep = located.points[pick];
  const LoopReport small =
      loop_monodromy(p, ep, 0.15 * clearance, +1, 1, &located.points);
  const LoopReport large =
      loop_monodromy(p, ep, 0.45 * clearance, +1, 1, &located.points);
  CHECK(small.permutation == large.permutation);
  for (Index i = 0; i < small.phase_factors.size(); ++i)
    CHECK(std::abs(small.phase_factors[i] - large.phase_factors[i]) < 1e-6);
}

TEST_CASE("loop_monodromy: loop around two EPs composes their swaps") {
  const auto p = build_pencil(sample_params(4, std::numbers::pi, 808, 2));
  const auto located = locate_eps(p);
  // find the closest pair of EPs on the same half-plane
  int a = -1, b = -1;
  double dmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(located.points.size()); ++i)
    for (int j = i + 1; j < static_cast<int>(located.points.size()); ++j) {
      const double d = std::abs(located.points[i].lambda_c -
                                located.points[j].lambda_c);
      if (d < dmin) {
        dmin = d;
        a = i;
        b = j;
      }
    }
  const Cplx center =
      0.5 * (located.points[a].lambda_c + located.points[b].lambda_c);
  double others = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(located.points.size()); ++i)
    if (i != a && i != b)
      others = std::min(others, std::abs(located.points[i].lambda_c - center));
  const double radius = 0.75 * dmin;
  if (radius < others) {  // geometry permits a clean two-EP loop
    ExceptionalPoint fake;
    fake.lambda_c = center;
    const LoopReport both =
        loop_monodromy(p, fake, radius, +1, 1, &located.points);
    CHECK(both.enclosed_eps.size() == 2);
    CHECK(both.multi_ep_warning);
    const LoopReport la = loop_monodromy(
        p, located.points[a], 0.3 * dmin, +1, 1, &located.points);
    const LoopReport lb = loop_monodromy(
        p, located.points[b], 0.3 * dmin, +1, 1, &located.points);
    std::vector<int> ab(la.permutation.size()), ba(la.permutation.size());
    for (std::size_t i = 0; i < ab.size(); ++i) {
      ab[i] = la.permutation[lb.permutation[i]];
      ba[i] = lb.permutation[la.permutation[i]];
    }
    CHECK((both.permutation == ab || both.permutation == ba));
  }
}

TEST_CASE("track_spectrum: trace identity and eigenresiduals along a segment") {
  const auto p = build_pencil(sample_params(5, std::numbers::pi, 909, 1));
  const SheetTrace tr =
      track_spectrum(p, segment_path(Cplx(-1.5, 0.8), Cplx(1.2, 0.4), 40));
  check_trace_identity(p, tr);
  check_eigen_residuals(p, tr);
}

TEST_CASE("crossing_scan: 2x2 quarter-angle dichotomy") {
  const auto p = pencil_2x2(std::numbers::pi / 4);
  const auto located = locate_eps(p);
  const auto& ep = located.points[1];
  const CrossingReport rep = crossing_scan(p, ep, 0.1, &located.points);
  CHECK(rep.above.real_part_crosses);
  CHECK_FALSE(rep.above.imag_part_crosses);
  CHECK_FALSE(rep.below.real_part_crosses);
  CHECK(rep.below.imag_part_crosses);

  // stability under offset halving
  const CrossingReport half = crossing_scan(p, ep, 0.05, &located.points);
  CHECK(half.above.real_part_crosses == rep.above.real_part_crosses);
  CHECK(half.above.imag_part_crosses == rep.above.imag_part_crosses);
  CHECK(half.below.real_part_crosses == rep.below.real_part_crosses);
  CHECK(half.below.imag_part_crosses == rep.below.imag_part_crosses);
}

TEST_CASE("crossing_scan: real-axis EP rejects the scan") {
  const auto p = pencil_2x2(0.0);
  const auto located = locate_eps(p);
  REQUIRE(located.points.size() == 1);
  CHECK_THROWS_AS(crossing_scan(p, located.points[0], 0.1, &located.points),
                  ParameterError);
}

TEST_CASE("winding_number") {
  const LambdaPath path = circle_path(Cplx(1, 1), 0.5, 2, -1);
  CHECK(winding_number(path.samples, Cplx(1, 1)) == -2);
  CHECK(winding_number(path.samples, Cplx(3, 0)) == 0);
}
