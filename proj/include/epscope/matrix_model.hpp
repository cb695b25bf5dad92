#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "epscope/core.hpp"

namespace epscope {

// Generating parameters of a pencil H(lambda) = H0 + lambda*H1: the spectra
// of H0 and H1 and the rotation angles mixing the H1 eigenbasis against the
// H0 eigenbasis.
struct PencilParams {
  Vec eps;     // eigenvalues of H0
  Vec omega;   // eigenvalues of H1
  Vec angles;  // n(n-1)/2 rotation angles, pair order (0,1),(0,2),...,(n-2,n-1)

  Index dim() const { return eps.size(); }
  void validate() const;
};

struct MatrixPencil {
  PencilParams params;
  Mat h0;  // diagonal
  Mat h1;  // U * diag(omega) * U^T
  Index dim() const { return h0.rows(); }
};

// One straight line eps + lambda*omega of the uncoupled spectrum, or the
// large-|lambda| asymptote of a coupled level.
struct UnperturbedLine {
  double slope = 0.0;
  double intercept = 0.0;
  Index index = 0;
};

struct Intersection {
  double lambda = 0.0;
  Index i = 0;
  Index k = 0;
};

struct IntersectionSet {
  std::vector<Intersection> points;
  Index parallel_skipped = 0;  // pairs with equal slopes, omitted
};

// Composition of the Givens rotations G(0,1), G(0,2), ..., G(n-2,n-1) applied
// left to right; identity when all angles vanish.
Mat rotation_matrix(Index n, const Vec& angles);

MatrixPencil build_pencil(const PencilParams& params);

// H0 + lambda*H1; complex symmetric for every complex lambda.
CMat evaluate(const MatrixPencil& pencil, Cplx lambda);

// n_real pencils with eps, omega i.i.d. uniform on [-1,1] and angles uniform
// on [-angle_window, angle_window]. Realization j draws from substream
// (seed, j), so the ensemble is identical however the loop is scheduled.
std::vector<MatrixPencil> sample_ensemble(Index n_dim, Index n_real,
                                          double angle_window,
                                          std::uint64_t seed);

PencilParams sample_params(Index n_dim, double angle_window,
                           std::uint64_t seed, std::uint64_t realization);

// lambda_{i,k} = -(eps_i - eps_k)/(omega_i - omega_k) over pairs i<k;
// equal-slope pairs are skipped and tallied.
IntersectionSet unperturbed_intersections(const PencilParams& params);

// Slope omega_k, intercept alpha_k = (U^{-1} H0 U)_{kk}, ordered by k.
std::vector<UnperturbedLine> asymptotic_lines(const MatrixPencil& pencil);

}  // namespace epscope
