#include "epscope/matrix_model.hpp"

#include <cmath>

#include "epscope/rng.hpp"

namespace epscope {

void PencilParams::validate() const {
  const Index n = eps.size();
  if (n < 2) throw ParameterError("pencil needs dimension >= 2");
  if (omega.size() != n)
    throw ParameterError("eps and omega must have equal length");
  if (angles.size() != n * (n - 1) / 2)
    throw ParameterError("angles must have n(n-1)/2 entries");
  if (!all_finite(eps) || !all_finite(omega) || !all_finite(angles))
    throw ParameterError("pencil parameters must be finite");
}

Mat rotation_matrix(Index n, const Vec& angles) {
  Mat u = Mat::Identity(n, n);
  Index k = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j, ++k) {
      const double c = std::cos(angles[k]);
      const double s = std::sin(angles[k]);
      // right-multiply by the plane rotation acting on columns (i, j)
      Vec ci = u.col(i), cj = u.col(j);
      u.col(i) = c * ci - s * cj;
      u.col(j) = s * ci + c * cj;
    }
  }
  return u;
}

MatrixPencil build_pencil(const PencilParams& params) {
  params.validate();
  const Index n = params.dim();
  MatrixPencil p;
  p.params = params;
  p.h0 = params.eps.asDiagonal();
  const Mat u = rotation_matrix(n, params.angles);
  p.h1 = u * params.omega.asDiagonal() * u.transpose();
  // symmetrize away rounding skew
  p.h1 = 0.5 * (p.h1 + p.h1.transpose()).eval();
  return p;
}

CMat evaluate(const MatrixPencil& pencil, Cplx lambda) {
  if (!is_finite(lambda)) throw ParameterError("lambda must be finite");
  return pencil.h0.cast<Cplx>() + lambda * pencil.h1.cast<Cplx>();
}

PencilParams sample_params(Index n_dim, double angle_window,
                           std::uint64_t seed, std::uint64_t realization) {
  SplitMix64 rng(seed, realization);
  PencilParams params;
  params.eps.resize(n_dim);
  params.omega.resize(n_dim);
  params.angles.resize(n_dim * (n_dim - 1) / 2);
  for (Index i = 0; i < n_dim; ++i) params.eps[i] = rng.next_symmetric(1.0);
  for (Index i = 0; i < n_dim; ++i) params.omega[i] = rng.next_symmetric(1.0);
  for (Index i = 0; i < params.angles.size(); ++i)
    params.angles[i] = rng.next_symmetric(angle_window);
  return params;
}

std::vector<MatrixPencil> sample_ensemble(Index n_dim, Index n_real,
                                          double angle_window,
                                          std::uint64_t seed) {
  if (n_dim < 2) throw ParameterError("ensemble dimension must be >= 2");
  if (n_real < 1) throw ParameterError("ensemble needs >= 1 realization");
  if (angle_window < 0) throw ParameterError("angle_window must be >= 0");
  std::vector<MatrixPencil> out;
  out.reserve(static_cast<std::size_t>(n_real));
  for (Index j = 0; j < n_real; ++j)
    out.push_back(build_pencil(
        sample_params(n_dim, angle_window, seed, static_cast<std::uint64_t>(j))));
  return out;
}

IntersectionSet unperturbed_intersections(const PencilParams& params) {
  params.validate();
  IntersectionSet set;
  const Index n = params.dim();
  for (Index i = 0; i < n; ++i) {
    for (Index k = i + 1; k < n; ++k) {
      const double dw = params.omega[i] - params.omega[k];
      if (dw == 0.0) {
        ++set.parallel_skipped;
        continue;
      }
      set.points.push_back(
          {-(params.eps[i] - params.eps[k]) / dw, i, k});
    }
  }
  return set;
}

std::vector<UnperturbedLine> asymptotic_lines(const MatrixPencil& pencil) {
  const Index n = pencil.dim();
  const Mat u = rotation_matrix(n, pencil.params.angles);
  const Mat rotated = u.transpose() * pencil.h0 * u;
  std::vector<UnperturbedLine> lines(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k)
    lines[static_cast<std::size_t>(k)] = {pencil.params.omega[k],
                                          rotated(k, k), k};
  return lines;
}

}  // namespace epscope
