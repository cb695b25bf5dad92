#pragma once

#include "epscope/core.hpp"
#include "epscope/matrix_model.hpp"

namespace epscope {

// Coefficients of det(E*I - H0 - lambda*H1) in ascending powers of E,
// monic of degree N. Built from the eigenvalues of H(lambda).
CVec char_poly_at(const MatrixPencil& pencil, Cplx lambda);

// The full bivariate characteristic polynomial
//   p(E, lambda) = sum_{k,m} a_{k,m} E^k lambda^m,  0 <= k+m <= N,
// recovered once per pencil by trigonometric interpolation on a circle
// |lambda| = rho and stored in the scaled variables E = sigma*e, lambda =
// rho*z so every held coefficient is O(1) for the annulus around rho. All
// coefficients are real (H0, H1 real); the imaginary interpolation residue
// is kept as a diagnostic.
class CharPolyTable {
 public:
  struct Eval {
    Cplx p;        // p-hat(e, z)
    Cplx p_e;      // d/de
    Cplx p_z;      // d/dz
    Cplx p_ee;     // d2/de2
    Cplx p_ez;     // d2/dedz
    double scale_p;   // sum |T_km| |e|^k |z|^m  (evaluation magnitude scale)
    double scale_pe;  // same for the e-derivative
  };

  CharPolyTable() = default;
  CharPolyTable(const MatrixPencil& pencil, double rho);

  // evaluated in long double to keep the Newton iterate jitter below the
  // deduplication radius
  Eval eval(Cplx e, Cplx z) const;

  double rho() const { return rho_; }
  double sigma() const { return sigma_; }
  double imag_residue() const { return imag_residue_; }
  Cplx to_lambda(Cplx z) const { return z * rho_; }
  Cplx to_energy(Cplx e) const { return e * sigma_; }
  Cplx from_lambda(Cplx lambda) const { return lambda / rho_; }
  Cplx from_energy(Cplx energy) const { return energy / sigma_; }

 private:
  Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> coeff_;
  Mat coeff_abs_;  // |coeff| in double, for the evaluation scales
  double rho_ = 1.0;
  double sigma_ = 1.0;
  double imag_residue_ = 0.0;
};

}  // namespace epscope
