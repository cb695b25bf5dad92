#include "epscope/ep_local.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "epscope/monodromy.hpp"

namespace epscope {

double phase_rigidity(const CVec& v) {
  const double nrm2 = v.squaredNorm();
  if (!(nrm2 > 0.0)) throw ParameterError("phase_rigidity needs a nonzero vector");
  const Cplx bilinear = (v.transpose() * v).value();
  return std::abs(bilinear) / nrm2;
}

EpEigenvector ep_eigenvector(const MatrixPencil& pencil,
                             const ExceptionalPoint& ep) {
  const Index n = pencil.dim();
  const CMat m = evaluate(pencil, ep.lambda_c) -
                 ep.energy_c * CMat::Identity(n, n);
  Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeFullV);
  const Vec sv = svd.singularValues();

  Eigen::ComplexEigenSolver<CMat> es(evaluate(pencil, ep.lambda_c), false);
  const CVec mu = es.eigenvalues();
  const double scale = gap_scale(pencil, ep.lambda_c, mu);

  if (n >= 2 && sv[n - 2] < 1e-8 * scale)
    throw NumericalError(
        "two singular values vanish at lambda_c: higher-order degeneracy, "
        "geometric multiplicity exceeds 1");

  // the point must actually be a two-level coalescence
  double g0 = std::numeric_limits<double>::infinity();
  double g1 = g0;
  for (Index i = 0; i < n; ++i) {
    const double d = std::abs(mu[i] - ep.energy_c);
    if (d < g0) {
      g1 = g0;
      g0 = d;
    } else if (d < g1) {
      g1 = d;
    }
  }
  if (g0 + g1 > 1e-5 * scale)
    throw NumericalError(
        "not a defective point: no coalescing eigenvalue pair at lambda_c");

  EpEigenvector out;
  out.vector = svd.matrixV().col(n - 1);
  out.vector.normalize();
  out.self_orthogonality =
      std::abs((out.vector.transpose() * out.vector).value());
  out.second_singular = sv[n - 2] / scale;
  return out;
}

ChiralityResult chirality_decompose(const MatrixPencil& pencil,
                                    const ExceptionalPoint& ep, double delta) {
  const Cplx lc = ep.lambda_c;
  if (std::abs(lc.imag()) <= 0.0)
    throw ParameterError("chirality reference needs an EP off the real axis");
  const Index n = pencil.dim();

  const EpEigenvector local = ep_eigenvector(pencil, ep);
  const CVec& v = local.vector;

  // reference pair: track from the real axis toward the EP and take the two
  // branches that head into the coalescence
  const double stop_dist =
      std::clamp(delta * std::abs(lc), 1e-3 * std::abs(lc.imag()),
                 0.5 * std::abs(lc.imag()));
  const Cplx stop(lc.real(),
                  lc.imag() - (lc.imag() > 0 ? stop_dist : -stop_dist));
  const SheetTrace tr =
      track_spectrum(pencil, segment_path(Cplx(lc.real(), 0.0), stop, 33));

  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  const CVec& final_mu = tr.energies.back();
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    return std::abs(final_mu[a] - ep.energy_c) <
           std::abs(final_mu[b] - ep.energy_c);
  });
  Index bi = order[0], bj = order[1];
  // deterministic labeling: psi1 belongs to the lower eigenvalue at lambda_r
  if (tr.energies.front()[bi].real() > tr.energies.front()[bj].real())
    std::swap(bi, bj);

  Vec psi1 = tr.frames.front().col(bi).real();
  Vec psi2 = tr.frames.front().col(bj).real();
  psi1.normalize();
  psi2 -= psi1 * psi1.dot(psi2);
  psi2.normalize();
  for (Vec* psi : {&psi1, &psi2}) {
    Index imax = 0;
    psi->cwiseAbs().maxCoeff(&imax);
    if ((*psi)[imax] < 0.0) *psi = -*psi;
  }

  const Cplx c1 = (psi1.cast<Cplx>().adjoint() * v).value();
  const Cplx c2 = (psi2.cast<Cplx>().adjoint() * v).value();
  ChiralityResult out;
  out.capture = std::sqrt(std::norm(c1) + std::norm(c2));
  if (out.capture < 0.99)
    throw NumericalError(
        "reference-pair mismatch: the EP eigenvector is not dominated by a "
        "two-level coalescence at this scale (capture " +
        std::to_string(out.capture) + ")");
  const double plus = std::abs(c1 - Cplx(0, 1) * c2) / std::sqrt(2.0);
  const double minus = std::abs(c1 + Cplx(0, 1) * c2) / std::sqrt(2.0);
  out.sign = plus >= minus ? +1 : -1;
  out.error = 1.0 - std::max(plus, minus);
  return out;
}

EpEigenvector ep_local_report(const MatrixPencil& pencil,
                              const ExceptionalPoint& ep, double delta) {
  EpEigenvector out = ep_eigenvector(pencil, ep);
  const ChiralityResult chir = chirality_decompose(pencil, ep, delta);
  out.chirality_sign = chir.sign;
  out.decomposition_error = chir.error;
  return out;
}

}  // namespace epscope
