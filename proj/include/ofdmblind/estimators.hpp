#pragma once

#include <limits>
#include <optional>
#include <string>

#include "ofdmblind/covariance.hpp"
#include "ofdmblind/ofdm.hpp"
#include "ofdmblind/precoder.hpp"
#include "ofdmblind/types.hpp"

namespace ofdmblind {

/// Which part of the channel an estimate still leaves undetermined.
enum class Ambiguity { ComplexScalar, PhaseOnly, Resolved };

std::string to_string(Ambiguity a);

struct EstimateDiagnostics {
  /// Subspace: smallest eigenvalue of the tap-recovery matrix. Precoding: principal eigenvalue.
  double residual_eigenvalue = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  double phase_correction = 0.0;  // radians removed by the blind phase resolver
};

struct ChannelEstimate {
  CVectorXd response;               // H_hat, length N
  std::optional<CVectorXd> taps;    // h_hat when the estimator works in the tap domain
  Ambiguity ambiguity = Ambiguity::ComplexScalar;
  EstimateDiagnostics diagnostics;
};

// ---------------------------------------------------------------------------
// CP-induced subspace estimator (time domain, W = I or any full-rank W).
// ---------------------------------------------------------------------------

/// Sliding composite vectors over consecutive symbol pairs (n-1, n) with the
/// first L samples of the pair discarded: M blocks in, M-1 columns of length
/// 2N+L out. Requires cp_len == channel_order.
CMatrixXd composite_blocks(const CVectorXd& received, const OfdmConfig& cfg);

/// CP re-insertion map T, 2(N+L) x 2N, for a pair of IFFT bodies.
Eigen::MatrixXd cp_insertion_matrix(const OfdmConfig& cfg);

/// Composite channel matrix H(h) = C_h T, (2N+L) x 2N.
CMatrixXd build_conv_matrix(const CVectorXd& taps, const OfdmConfig& cfg);

struct SubspaceOptions {
  /// Refuse covariances from fewer than 2N+L+1 vectors (persistence of excitation).
  bool require_full_rank = true;
};

/// Noise-subspace channel estimate from the composite-block covariance.
///
/// The L eigenvectors g_i of the smallest eigenvalues are orthogonal to the
/// range of H(h). Since g^H C_h is linear in h, each g_i yields an
/// (L+1) x 2N matrix A_i with h^T A_i = 0; the taps are the minimiser of
/// sum_i ||h^T A_i||^2 on the unit sphere. Throws EstimatorFailure when the
/// sample covariance cannot have full rank (fewer than 2N+L+1 vectors).
ChannelEstimate subspace_estimate(const CovarianceXd& composite, const OfdmConfig& cfg,
                                  const SubspaceOptions& options = {});

/// Mean of the L smallest eigenvalues of the composite covariance.
double noise_variance_from_composite(const CovarianceXd& composite, const OfdmConfig& cfg);

// ---------------------------------------------------------------------------
// Precoding-induced correlation estimator (frequency domain).
// ---------------------------------------------------------------------------

/// Rank-one reconstruction: C(k,l) = sigma_c2 p H_k conj(H_l) off the
/// diagonal and sigma_c2 |H_k|^2 + sigma_n2 on it. The principal eigenpair of
/// the normalised matrix gives H up to a common phase; the returned estimate
/// has arg(H_hat[0]) = 0. Throws ConfigError when p = 0.
ChannelEstimate precoding_estimate(const CovarianceXd& freq, const PrecoderXd& precoder, double sigma_n2,
                                   double sigma_c2);

/// Squared bin gains |H_k|^2 = max(E|y_k|^2 - sigma_n2, 0) / (sigma_c2 + |(W mu)_k|^2).
VectorXd estimate_bin_magnitudes(const CovarianceXd& freq, const PrecoderXd& precoder, const CVectorXd& symbol_mean,
                                 double sigma_n2, double sigma_c2);

// ---------------------------------------------------------------------------
// Oracle ambiguity removal for semi-blind scoring.
// ---------------------------------------------------------------------------

struct ScalarAlignment {
  CVectorXd corrected;
  cd alpha;
};

struct PhaseAlignment {
  CVectorXd corrected;
  double theta = 0.0;
};

/// alpha = <H_hat, H> / ||H_hat||^2, the least-squares complex gain.
ScalarAlignment oracle_align_scalar(const CVectorXd& estimate, const CVectorXd& truth);

/// theta = arg <H_hat, H>; corrected = exp(j theta) H_hat.
PhaseAlignment oracle_align_phase(const CVectorXd& estimate, const CVectorXd& truth);

}  // namespace ofdmblind
