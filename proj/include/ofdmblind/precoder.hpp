#pragma once

#include <cmath>

#include "ofdmblind/types.hpp"

namespace ofdmblind {

/// Non-redundant precoder W = P^{1/2}, where P has unit diagonal and
/// off-diagonal p. Stored as W = a I + b 11^T (and W^{-1} in the same form);
/// P has eigenvalue 1+(N-1)p along the all-ones vector and 1-p on its
/// orthogonal complement, and the square root shares those eigenvectors.
template <typename Real>
class Precoder {
 public:
  Precoder(Eigen::Index n, Real p) : n_(n), p_(p) {
    if (n <= 0) throw ConfigError("precoder size must be positive");
    if (!(p >= Real(0) && p < Real(1))) throw ConfigError("precoding constant must lie in [0, 1)");
    const Real nn = static_cast<Real>(n);
    const Real lam_perp = std::sqrt(Real(1) - p);
    const Real lam_ones = std::sqrt(Real(1) + (nn - Real(1)) * p);
    a_ = lam_perp;
    b_ = (lam_ones - lam_perp) / nn;
    a_inv_ = Real(1) / lam_perp;
    b_inv_ = (Real(1) / lam_ones - Real(1) / lam_perp) / nn;
  }

  Eigen::Index size() const { return n_; }
  Real p() const { return p_; }
  Real a() const { return a_; }
  Real b() const { return b_; }
  Real a_inv() const { return a_inv_; }
  Real b_inv() const { return b_inv_; }

  /// x = W d, O(N). Accepts a vector or a matrix of column blocks.
  template <typename Derived>
  CMatrix<Real> apply(const Eigen::MatrixBase<Derived>& d) const {
    return apply_form(d, a_, b_);
  }

  /// d = W^{-1} z.
  template <typename Derived>
  CMatrix<Real> inverse(const Eigen::MatrixBase<Derived>& z) const {
    return apply_form(z, a_inv_, b_inv_);
  }

  Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> dense() const {
    Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> w =
        Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>::Constant(n_, n_, b_);
    w.diagonal().array() += a_;
    return w;
  }

  /// The correlation matrix P = W^2.
  Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> correlation() const {
    Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> pm =
        Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>::Constant(n_, n_, p_);
    pm.diagonal().setOnes();
    return pm;
  }

 private:
  template <typename Derived>
  CMatrix<Real> apply_form(const Eigen::MatrixBase<Derived>& v, Real diag, Real ones) const {
    if (v.rows() != n_) throw DimensionError("precoder input length differs from N");
    CMatrix<Real> out = diag * v;
    out.rowwise() += ones * v.colwise().sum();
    return out;
  }

  Eigen::Index n_;
  Real p_;
  Real a_, b_, a_inv_, b_inv_;
};

using PrecoderXd = Precoder<double>;

}  // namespace ofdmblind
