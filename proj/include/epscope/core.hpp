#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace epscope {

using Cplx = std::complex<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using Eigen::Index;

// Invalid user-supplied input (dimensions, ranges, missing values). Maps to
// CLI exit code 2.
class ParameterError : public std::runtime_error {
 public:
  explicit ParameterError(const std::string& what) : std::runtime_error(what) {}
};

// A computation could not be completed reliably (conditioning, convergence,
// degenerate input data). Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Not enough data for a statistically meaningful result. Maps to exit code 3.
class StatisticsError : public NumericalError {
 public:
  explicit StatisticsError(const std::string& what) : NumericalError(what) {}
};

// A geometric precondition of a scan or loop does not hold for this pencil
// (e.g. another coalescence point inside a scan rectangle). Exit code 3.
class ConfigurationError : public NumericalError {
 public:
  explicit ConfigurationError(const std::string& what) : NumericalError(what) {}
};

inline bool all_finite(const Vec& v) { return v.allFinite(); }

inline bool is_finite(Cplx z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

}  // namespace epscope
