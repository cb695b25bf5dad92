#include "epscope/char_poly.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace epscope {

namespace {

Index next_pow2(Index m) {
  Index p = 1;
  while (p < m) p *= 2;
  return p;
}

}  // namespace

CVec char_poly_at(const MatrixPencil& pencil, Cplx lambda) {
  if (!is_finite(lambda)) throw ParameterError("lambda must be finite");
  const Index n = pencil.dim();
  Eigen::ComplexEigenSolver<CMat> es(evaluate(pencil, lambda), false);
  if (es.info() != Eigen::Success)
    throw NumericalError("eigensolver failed while building char poly");
  const CVec mu = es.eigenvalues();
  CVec c = CVec::Zero(n + 1);
  c[0] = 1.0;  // product of (E - mu_i), ascending coefficients
  for (Index i = 0; i < n; ++i) {
    for (Index k = i + 1; k > 0; --k) c[k] = c[k - 1] - mu[i] * c[k];
    c[0] *= -mu[i];
  }
  return c;
}

CharPolyTable::CharPolyTable(const MatrixPencil& pencil, double rho) {
  const Index n = pencil.dim();
  rho_ = rho;
  sigma_ = std::max(1.0, pencil.params.eps.cwiseAbs().maxCoeff() +
                             rho * pencil.params.omega.cwiseAbs().maxCoeff());
  const Index m_samples = next_pow2(2 * (n + 1));
  CMat samples(n + 1, m_samples);
  for (Index m = 0; m < m_samples; ++m) {
    const double th = 2.0 * std::numbers::pi * static_cast<double>(m) /
                      static_cast<double>(m_samples);
    samples.col(m) = char_poly_at(pencil, rho * Cplx(std::cos(th), std::sin(th)));
  }
  // the coefficient functions a_k(lambda) are real polynomials, so the
  // samples obey a_k(conj lambda) = conj a_k(lambda); symmetrize first
  for (Index m = 1; m < m_samples / 2; ++m) {
    const Index mm = m_samples - m;
    for (Index k = 0; k <= n; ++k) {
      const Cplx avg = 0.5 * (samples(k, m) + std::conj(samples(k, mm)));
      samples(k, m) = avg;
      samples(k, mm) = std::conj(avg);
    }
  }
  // inverse DFT per row: b_{k,m} = a_{k,m} rho^m for m = 0..n (alias-free:
  // degree in lambda is at most n < m_samples)
  coeff_.resize(n + 1, n + 1);
  coeff_abs_.resize(n + 1, n + 1);
  imag_residue_ = 0.0;
  double max_mag = 0.0;
  for (Index k = 0; k <= n; ++k) {
    for (Index m = 0; m <= n; ++m) {
      Cplx acc = 0.0;
      for (Index j = 0; j < m_samples; ++j) {
        const double th = -2.0 * std::numbers::pi * static_cast<double>(m) *
                          static_cast<double>(j) / static_cast<double>(m_samples);
        acc += samples(k, j) * Cplx(std::cos(th), std::sin(th));
      }
      acc /= static_cast<double>(m_samples);
      // scale to p-hat(e, z) = p(sigma e, rho z) / sigma^n
      const double row_scale = std::pow(sigma_, static_cast<double>(k - n));
      const double val = acc.real() * row_scale;
      coeff_(k, m) = static_cast<long double>(val);
      coeff_abs_(k, m) = std::abs(val);
      imag_residue_ = std::max(imag_residue_, std::abs(acc.imag()) * row_scale);
      max_mag = std::max(max_mag, std::abs(val));
    }
  }
  if (max_mag > 0.0) imag_residue_ /= max_mag;
  if (imag_residue_ > 1e-9)
    throw NumericalError(
        "char-poly interpolation lost conjugate symmetry (residue " +
        std::to_string(imag_residue_) + "); pencil near-degenerate?");
}

CharPolyTable::Eval CharPolyTable::eval(Cplx e, Cplx z) const {
  using CL = std::complex<long double>;
  const Index n1 = coeff_.rows();
  const CL el(e.real(), e.imag());
  const CL zl(z.real(), z.imag());

  // a_k(z), a_k'(z) by Horner per row
  Eigen::Vector<CL, Eigen::Dynamic> a(n1), ap(n1);
  for (Index k = 0; k < n1; ++k) {
    CL acc = 0.0L, dacc = 0.0L;
    for (Index m = n1 - 1; m >= 0; --m) {
      dacc = dacc * zl + acc;
      acc = acc * zl + coeff_(k, m);
    }
    a[k] = acc;
    ap[k] = dacc;
  }
  // Horner in e for p, p_e, p_ee, p_z, p_ez
  CL p = 0.0L, pe = 0.0L, pee = 0.0L, pz = 0.0L, pez = 0.0L;
  for (Index k = n1 - 1; k >= 0; --k) {
    pee = pee * el + 2.0L * pe;
    pe = pe * el + p;
    p = p * el + a[k];
    pez = pez * el + pz;
    pz = pz * el + ap[k];
  }
  // evaluation magnitude scales in plain double
  const double ae = std::abs(e), az = std::abs(z);
  double epow = 1.0, sp = 0.0, spe = 0.0;
  for (Index k = 0; k < n1; ++k) {
    double zpow = 1.0, row = 0.0;
    for (Index m = 0; m < n1; ++m) {
      row += coeff_abs_(k, m) * zpow;
      zpow *= az;
    }
    sp += row * epow;
    if (k >= 1) spe += static_cast<double>(k) * row * (epow / std::max(ae, 1e-300));
    epow *= ae;
  }

  Eval out;
  out.p = Cplx(static_cast<double>(p.real()), static_cast<double>(p.imag()));
  out.p_e = Cplx(static_cast<double>(pe.real()), static_cast<double>(pe.imag()));
  out.p_z = Cplx(static_cast<double>(pz.real()), static_cast<double>(pz.imag()));
  out.p_ee = Cplx(static_cast<double>(pee.real()), static_cast<double>(pee.imag()));
  out.p_ez = Cplx(static_cast<double>(pez.real()), static_cast<double>(pez.imag()));
  out.scale_p = sp;
  out.scale_pe = spe;
  return out;
}

}  // namespace epscope
