#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "epscope/ep_local.hpp"
#include "epscope/ep_locator.hpp"
#include "epscope/matrix_model.hpp"

using namespace epscope;

namespace {

MatrixPencil pencil_2x2(double phi) {
  PencilParams p;
  p.eps = Eigen::Vector2d(1, 2);
  p.omega = Eigen::Vector2d(2, 1);
  p.angles = Vec::Constant(1, phi);
  return build_pencil(p);
}

}  // namespace

TEST_CASE("phase_rigidity basics") {
  CVec real_vec(2);
  real_vec << 1, 0;
  CHECK(phase_rigidity(real_vec) == doctest::Approx(1.0));

  CVec chiral(2);
  chiral << Cplx(1, 0) / std::sqrt(2.0), Cplx(0, 1) / std::sqrt(2.0);
  CHECK(phase_rigidity(chiral) == doctest::Approx(0.0).epsilon(1e-14));

  CVec phased = real_vec * std::polar(1.0, 0.7);
  CHECK(phase_rigidity(phased) == doctest::Approx(1.0));

  CHECK_THROWS_AS(phase_rigidity(CVec::Zero(3)), ParameterError);
}

TEST_CASE("ep_eigenvector: 2x2 EP vector is the chiral combination") {
  const auto p = pencil_2x2(std::numbers::pi / 4);
  const auto located = locate_eps(p);
  const auto& ep = located.points[1];
  const EpEigenvector v = ep_eigenvector(p, ep);
  CHECK(std::abs(v.vector.norm() - 1.0) < 1e-12);
  CHECK(v.self_orthogonality < 1e-7);
  CHECK(v.second_singular > 1e-3);
  // (psi1 +- i psi2)/sqrt(2) in the H0 basis: both components modulus 1/sqrt2
  CHECK(std::abs(std::abs(v.vector[0]) - 1 / std::sqrt(2.0)) < 1e-7);
  CHECK(std::abs(std::abs(v.vector[1]) - 1 / std::sqrt(2.0)) < 1e-7);
}

TEST_CASE("ep_eigenvector: rejects a non-defective point") {
  const auto p = pencil_2x2(std::numbers::pi / 4);
  // far from any EP: lambda real, energy = one simple eigenvalue
  Eigen::SelfAdjointEigenSolver<Mat> es(p.h0 + 5.0 * p.h1);
  ExceptionalPoint fake;
  fake.lambda_c = Cplx(5.0, 0.0);
  fake.energy_c = es.eigenvalues()[0];
  CHECK_THROWS_AS(ep_eigenvector(p, fake), NumericalError);
}

TEST_CASE("chirality_decompose: conjugate EPs carry opposite signs (2x2)") {
  const auto p = pencil_2x2(std::numbers::pi / 4);
  const auto located = locate_eps(p);
  REQUIRE(located.points.size() == 2);
  const ChiralityResult lower = chirality_decompose(p, located.points[0]);
  const ChiralityResult upper = chirality_decompose(p, located.points[1]);
  CHECK(lower.sign == -upper.sign);
  CHECK(lower.error < 1e-10);
  CHECK(upper.error < 1e-10);
  CHECK(lower.capture > 0.999999);
}

TEST_CASE("chirality_decompose: reference-pair relabeling flips the sign") {
  // relabeling symmetry checked directly on the projection algebra
  const auto p = pencil_2x2(std::numbers::pi / 4);
  const auto located = locate_eps(p);
  const EpEigenvector v = ep_eigenvector(p, located.points[1]);
  Eigen::SelfAdjointEigenSolver<Mat> es(
      p.h0 + located.points[1].lambda_c.real() * p.h1);
  const Vec psi1 = es.eigenvectors().col(0);
  const Vec psi2 = es.eigenvectors().col(1);
  auto best = [&](const Vec& a, const Vec& b) {
    const Cplx c1 = (a.cast<Cplx>().adjoint() * v.vector).value();
    const Cplx c2 = (b.cast<Cplx>().adjoint() * v.vector).value();
    const double plus = std::abs(c1 - Cplx(0, 1) * c2) / std::sqrt(2.0);
    const double minus = std::abs(c1 + Cplx(0, 1) * c2) / std::sqrt(2.0);
    return std::pair<int, double>{plus >= minus ? +1 : -1,
                                  std::max(plus, minus)};
  };
  const auto [sign_ab, mag_ab] = best(psi1, psi2);
  const auto [sign_ba, mag_ba] = best(psi2, psi1);
  CHECK(sign_ab == -sign_ba);
  CHECK(mag_ab == doctest::Approx(mag_ba).epsilon(1e-12));
}

TEST_CASE("ep_local invariants over a small isolated ensemble") {
  // near-axis EPs of weakly coupled pencils: the regime where the two-level
  // reduction is quantitative
  int checked = 0;
  for (std::uint64_t j = 0; j < 4; ++j) {
    const auto p = build_pencil(sample_params(4, 0.005, 515151, j));
    const auto located = locate_eps(p);
    std::vector<int> signs(located.points.size(), 0);
    for (std::size_t i = 0; i < located.points.size(); ++i) {
      const auto& ep = located.points[i];
      // only probe EPs clearly off the axis and isolated from neighbors
      if (std::abs(ep.lambda_c.imag()) < 1e-6 * std::abs(ep.lambda_c)) continue;
      double dmin = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < located.points.size(); ++k)
        if (k != i)
          dmin = std::min(dmin, std::abs(located.points[k].lambda_c -
                                         ep.lambda_c));
      if (dmin < 0.05 * std::abs(ep.lambda_c)) continue;

      const EpEigenvector v = ep_eigenvector(p, ep);
      CHECK(v.self_orthogonality <= 1e-4);
      CHECK(phase_rigidity(v.vector) <= 1e-4);
      CHECK(v.second_singular >= 1e-3);
      const ChiralityResult chir = chirality_decompose(p, ep);
      CHECK(chir.error <= 1e-3);
      signs[i] = chir.sign;
      ++checked;
    }
    for (std::size_t i = 0; i < located.points.size(); ++i) {
      const int partner = located.points[i].conjugate_partner;
      if (signs[i] != 0 && partner >= 0 && signs[partner] != 0 &&
          static_cast<std::size_t>(partner) != i)
        CHECK(signs[i] == -signs[partner]);
    }
  }
  CHECK(checked >= 20);
}

TEST_CASE("phase rigidity is ~1 for eigenvectors at real lambda away from EPs") {
  const auto p = build_pencil(sample_params(4, 0.3, 999, 0));
  Eigen::SelfAdjointEigenSolver<Mat> es(p.h0 + 0.37 * p.h1);
  for (Index k = 0; k < 4; ++k) {
    const CVec v = es.eigenvectors().col(k).cast<Cplx>();
    CHECK(phase_rigidity(v) >= 0.99);
  }
}
