#pragma once

#include <cstddef>
#include <limits>

#include "ofdmblind/types.hpp"

namespace ofdmblind {

/// Centered sample covariance C = (1/M) sum (v - mean)(v - mean)^H.
template <typename Real>
struct CovarianceEstimate {
  /// Marks covariances built from the signal model rather than from samples.
  static constexpr std::size_t kExact = std::numeric_limits<std::size_t>::max();

  std::size_t count = 0;
  CVector<Real> mean;
  CMatrix<Real> cov;

  Eigen::Index dimension() const { return mean.size(); }
  bool exact() const { return count == kExact; }

  /// E[v_k conj(v_k)] including the mean.
  RVector<Real> second_moment_diagonal() const {
    return cov.diagonal().real() + mean.cwiseAbs2();
  }
};

using CovarianceXd = CovarianceEstimate<double>;

/// One-shot covariance of the columns of `samples`.
template <typename Derived>
CovarianceEstimate<typename Derived::RealScalar> batch_covariance(const Eigen::MatrixBase<Derived>& samples) {
  using Real = typename Derived::RealScalar;
  CovarianceEstimate<Real> est;
  const Eigen::Index m = samples.cols();
  if (m == 0) throw DimensionError("covariance of an empty sample set");
  est.count = static_cast<std::size_t>(m);
  est.mean = samples.rowwise().mean();
  CMatrix<Real> centered = samples.colwise() - est.mean;
  est.cov = CMatrix<Real>::Zero(samples.rows(), samples.rows());
  est.cov.template selfadjointView<Eigen::Lower>().rankUpdate(centered, Real(1) / static_cast<Real>(m));
  est.cov = est.cov.template selfadjointView<Eigen::Lower>();
  return est;
}

/// Streaming accumulator; one writer per instance.
template <typename Real>
class CovarianceAccumulator {
 public:
  explicit CovarianceAccumulator(Eigen::Index dimension)
      : sum_(CVector<Real>::Zero(dimension)), outer_(CMatrix<Real>::Zero(dimension, dimension)) {}

  template <typename Derived>
  void add(const Eigen::MatrixBase<Derived>& v) {
    if (v.size() != sum_.size()) throw DimensionError("covariance sample has the wrong dimension");
    sum_ += v;
    outer_.template selfadjointView<Eigen::Lower>().rankUpdate(v);
    ++count_;
  }

  std::size_t count() const { return count_; }

  CovarianceEstimate<Real> finish() const {
    if (count_ == 0) throw DimensionError("covariance of an empty sample set");
    CovarianceEstimate<Real> est;
    const Real inv = Real(1) / static_cast<Real>(count_);
    est.count = count_;
    est.mean = sum_ * inv;
    est.cov = CMatrix<Real>(outer_.template selfadjointView<Eigen::Lower>()) * inv;
    est.cov.noalias() -= est.mean * est.mean.adjoint();
    return est;
  }

 private:
  CVector<Real> sum_;
  CMatrix<Real> outer_;
  std::size_t count_ = 0;
};

}  // namespace ofdmblind
