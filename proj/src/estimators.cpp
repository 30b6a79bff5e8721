#include "ofdmblind/estimators.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace ofdmblind {
namespace {

void require_cp_equals_order(const OfdmConfig& cfg) {
  if (cfg.cp_len != cfg.channel_order) throw DimensionError("composite blocks require cp_len == channel_order");
}

}  // namespace

std::string to_string(Ambiguity a) {
  switch (a) {
    case Ambiguity::ComplexScalar:
      return "complex_scalar";
    case Ambiguity::PhaseOnly:
      return "phase_only";
    case Ambiguity::Resolved:
      return "resolved";
  }
  return "complex_scalar";
}

CMatrixXd composite_blocks(const CVectorXd& received, const OfdmConfig& cfg) {
  require_cp_equals_order(cfg);
  const Eigen::Index len = cfg.block_len();
  const Eigen::Index n_blocks = received.size() / len;
  if (received.size() % len != 0) throw DimensionError("stream length is not a multiple of N+P");
  if (n_blocks < 2) throw DimensionError("composite blocks need at least two OFDM symbols");
  const Eigen::Index l = cfg.channel_order;
  const Eigen::Index dim = 2 * cfg.n_subcarriers + l;
  CMatrixXd out(dim, n_blocks - 1);
  for (Eigen::Index n = 1; n < n_blocks; ++n) out.col(n - 1) = received.segment((n - 1) * len + l, dim);
  return out;
}

Eigen::MatrixXd cp_insertion_matrix(const OfdmConfig& cfg) {
  const Eigen::Index n = cfg.n_subcarriers;
  const Eigen::Index p = cfg.cp_len;
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(2 * (n + p), 2 * n);
  for (Eigen::Index b = 0; b < 2; ++b) {
    const Eigen::Index row0 = b * (n + p);
    for (Eigen::Index j = 0; j < n; ++j) {
      t(row0 + p + j, b * n + j) = 1.0;
      if (j >= n - p) t(row0 + j - (n - p), b * n + j) = 1.0;
    }
  }
  return t;
}

CMatrixXd build_conv_matrix(const CVectorXd& taps, const OfdmConfig& cfg) {
  require_cp_equals_order(cfg);
  const Eigen::Index l = cfg.channel_order;
  if (taps.size() != l + 1) throw DimensionError("tap count differs from channel_order + 1");
  const Eigen::Index n = cfg.n_subcarriers;
  const Eigen::Index rows = 2 * n + l;
  CMatrixXd conv = CMatrixXd::Zero(rows, 2 * (n + l));
  for (Eigen::Index m = 0; m < rows; ++m) {
    for (Eigen::Index i = 0; i <= l; ++i) conv(m, m + i) = taps[l - i];
  }
  return conv * cp_insertion_matrix(cfg).cast<cd>();
}

ChannelEstimate subspace_estimate(const CovarianceXd& composite, const OfdmConfig& cfg,
                                  const SubspaceOptions& options) {
  require_cp_equals_order(cfg);
  const Eigen::Index n = cfg.n_subcarriers;
  const Eigen::Index l = cfg.channel_order;
  const Eigen::Index dim = 2 * n + l;
  if (composite.dimension() != dim) throw DimensionError("composite covariance has the wrong dimension");
  if (options.require_full_rank && !composite.exact() && composite.count <= static_cast<std::size_t>(dim)) {
    throw EstimatorFailure("too few composite blocks for a full-rank covariance (persistence of excitation)");
  }

  Eigen::SelfAdjointEigenSolver<CMatrixXd> eig(composite.cov);
  if (eig.info() != Eigen::Success) throw EstimatorFailure("composite covariance eigendecomposition failed");

  // Column j of the 2(N+L) window maps to body sample(s) through T; fold it in
  // directly instead of multiplying by the sparse T.
  const Eigen::Index p = cfg.cp_len;
  CMatrixXd q = CMatrixXd::Zero(l + 1, l + 1);
  CMatrixXd a(l + 1, 2 * n);
  for (Eigen::Index i = 0; i < l; ++i) {
    const auto g = eig.eigenvectors().col(i);
    auto gbar = [&](Eigen::Index row, Eigen::Index col) -> cd {
      const Eigen::Index idx = col - l + row;
      return idx >= 0 && idx < dim ? std::conj(g[idx]) : cd{};
    };
    for (Eigen::Index b = 0; b < 2; ++b) {
      const Eigen::Index col0 = b * (n + p);
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index r = 0; r <= l; ++r) {
          cd v = gbar(r, col0 + p + j);
          if (j >= n - p) v += gbar(r, col0 + j - (n - p));
          a(r, b * n + j) = v;
        }
      }
    }
    q.noalias() += a * a.adjoint();
  }

  // h^T A = 0 means u^H (A A^H) u = 0 for u = conj(h).
  Eigen::SelfAdjointEigenSolver<CMatrixXd> qeig(q);
  CVectorXd taps = qeig.eigenvectors().col(0).conjugate();
  taps.normalize();

  ChannelEstimate est;
  est.response = channel_freq_response(taps, n);
  est.taps = std::move(taps);
  est.ambiguity = Ambiguity::ComplexScalar;
  est.diagnostics.residual_eigenvalue = qeig.eigenvalues()[0];
  return est;
}

double noise_variance_from_composite(const CovarianceXd& composite, const OfdmConfig& cfg) {
  Eigen::SelfAdjointEigenSolver<CMatrixXd> eig(composite.cov, Eigen::EigenvaluesOnly);
  const Eigen::Index l = std::max(cfg.channel_order, 1);
  return std::max(eig.eigenvalues().head(l).mean(), 0.0);
}

ChannelEstimate precoding_estimate(const CovarianceXd& freq, const PrecoderXd& precoder, double sigma_n2,
                                   double sigma_c2) {
  if (precoder.p() == 0.0) throw ConfigError("precoding estimator needs p > 0");
  if (freq.dimension() != precoder.size()) throw DimensionError("frequency covariance has the wrong dimension");
  if (!(sigma_c2 > 0.0)) throw ConfigError("centered symbol variance must be positive");

  CMatrixXd g = freq.cov / (sigma_c2 * precoder.p());
  for (Eigen::Index k = 0; k < g.rows(); ++k) {
    g(k, k) = std::max(freq.cov(k, k).real() - sigma_n2, 0.0) / sigma_c2;
  }
  Eigen::SelfAdjointEigenSolver<CMatrixXd> eig(g);
  if (eig.info() != Eigen::Success) throw EstimatorFailure("correlation matrix eigendecomposition failed");
  const Eigen::Index top = g.rows() - 1;
  const double lambda = std::max(eig.eigenvalues()[top], 0.0);
  CVectorXd h = std::sqrt(lambda) * eig.eigenvectors().col(top);
  if (std::abs(h[0]) > 0.0) h *= std::conj(h[0]) / std::abs(h[0]);

  ChannelEstimate est;
  est.response = std::move(h);
  est.ambiguity = Ambiguity::PhaseOnly;
  est.diagnostics.residual_eigenvalue = lambda;
  return est;
}

VectorXd estimate_bin_magnitudes(const CovarianceXd& freq, const PrecoderXd& precoder, const CVectorXd& symbol_mean,
                                 double sigma_n2, double sigma_c2) {
  const VectorXd power = freq.second_moment_diagonal();
  const VectorXd mean_power = precoder.apply(symbol_mean).col(0).cwiseAbs2();
  VectorXd gains(power.size());
  for (Eigen::Index k = 0; k < power.size(); ++k) {
    gains[k] = std::max(power[k] - sigma_n2, 0.0) / (sigma_c2 + mean_power[k]);
  }
  return gains;
}

ScalarAlignment oracle_align_scalar(const CVectorXd& estimate, const CVectorXd& truth) {
  const double energy = estimate.squaredNorm();
  if (energy == 0.0) throw EstimatorFailure("cannot align a zero estimate");
  const cd alpha = estimate.dot(truth) / energy;  // dot() conjugates the left operand
  return {alpha * estimate, alpha};
}

PhaseAlignment oracle_align_phase(const CVectorXd& estimate, const CVectorXd& truth) {
  if (estimate.squaredNorm() == 0.0) throw EstimatorFailure("cannot align a zero estimate");
  const double theta = std::arg(estimate.dot(truth));
  return {std::polar(1.0, theta) * estimate, theta};
}

}  // namespace ofdmblind
