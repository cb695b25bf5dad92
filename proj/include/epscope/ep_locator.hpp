#pragma once

#include <utility>
#include <vector>

#include "epscope/char_poly.hpp"
#include "epscope/core.hpp"
#include "epscope/matrix_model.hpp"

namespace epscope {

// Degree-N(N-1) polynomial in lambda whose roots are the coupling values at
// which two eigenvalues of H(lambda) coalesce. Coefficients are real up to
// the interpolation residue and are stored real-symmetrized.
struct DiscriminantPoly {
  CVec coeffs;          // ascending in lambda, length N(N-1)+1
  Index dim = 0;
  double build_radius = 1.0;

  Cplx value(Cplx lambda) const;
};

struct ExceptionalPoint {
  Cplx lambda_c;
  Cplx energy_c;
  double residual = 0.0;        // max(|f1|,|f2|) over the evaluation scale
  double coalescence_gap = 0.0; // min eigenvalue gap at lambda_c over gap scale
  std::pair<int, int> sheet_pair{-1, -1};  // filled by the monodromy module
  int conjugate_partner = -1;   // index into the owning list, -1 if none
  int multiplicity = 1;         // >1 when coincident roots collapsed here
  bool near_degenerate = false; // Newton Jacobian nearly singular
};

struct EpList {
  std::vector<ExceptionalPoint> points;
  int duplicates_collapsed = 0;
};

// Spread of a complex spectrum; the gap/degeneracy scale of the pencil near
// lambda (does not collapse when all eigenvalues coalesce pairwise).
double spectral_diameter(const CVec& mu);
double gap_scale(const MatrixPencil& pencil, Cplx lambda, const CVec& mu);

// Geometric mean of the unperturbed intersection magnitudes, clamped to
// [1e-2, 1e2]; centers the recovery circle on the expected root cloud.
double default_build_radius(const PencilParams& params);

// Discriminant of char_poly_at in E as a polynomial in lambda, recovered
// from M >= 2(N(N-1)+1) equispaced samples on |lambda| = radius (radius <= 0
// picks default_build_radius). Throws on repeated omega (degree collapse)
// and on interpolation-consistency failure.
DiscriminantPoly discriminant_poly(const MatrixPencil& pencil,
                                   double radius = 0.0);

// Newton iteration on f1 = det(E - H0 - lambda H1), f2 = df1/dE from the
// interpolated characteristic polynomial, followed by a polish against
// eigenvalue products of the pencil itself. Throws NumericalError if the
// residual cannot be brought under tol within 50 iterations.
ExceptionalPoint refine_ep(const MatrixPencil& pencil, Cplx lambda0, Cplx e0,
                           double tol = 1e-11);

// Full pipeline: discriminant on a ladder of circle radii -> companion-matrix
// roots (balanced) -> refinement -> coalescence certification -> dedup ->
// conjugate closure. Points are sorted by (Re, Im) of lambda_c.
EpList locate_eps(const MatrixPencil& pencil, double tol = 1e-11,
                  int workers = 1);

// Closed form lambda_c = -(eps1-eps2)/(omega1-omega2) * exp(+-2i*phi) of the
// two-level problem; the analytic oracle for locate_eps.
std::pair<Cplx, Cplx> two_level_ep(double eps1, double eps2, double omega1,
                                   double omega2, double phi);

}  // namespace epscope
