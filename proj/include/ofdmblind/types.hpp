#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ofdmblind {

template <typename Real>
using Complex = std::complex<Real>;

template <typename Real>
using CVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

template <typename Real>
using CMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using cd = std::complex<double>;
using CVectorXd = CVector<double>;
using CMatrixXd = CMatrix<double>;
using Eigen::VectorXd;

/// Invalid or unsupported configuration (bad modulation order, p outside [0,1), ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector or matrix sizes that do not fit the configured frame geometry.
class DimensionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A constellation point lies on a split axis, so region assignment is ambiguous.
class SplittingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MappingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An estimator could not produce an estimate for this trial (rank-deficient
/// statistics, all bins in a null, ...). Trials catch this and count a failure.
class EstimatorFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kPi = 3.14159265358979323846;

/// Wraps an angle into (-pi, pi].
inline double wrap_phase(double a) {
  double w = std::remainder(a, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

}  // namespace ofdmblind
