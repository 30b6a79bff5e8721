#pragma once

#include <string_view>
#include <vector>

#include "ofdmblind/constellation.hpp"
#include "ofdmblind/covariance.hpp"
#include "ofdmblind/estimators.hpp"
#include "ofdmblind/precoder.hpp"

namespace ofdmblind {

enum class FirstApprox { Subspace, Precoding };

FirstApprox first_approx_from_name(std::string_view name);

struct MpdConfig {
  FirstApprox first_approx = FirstApprox::Subspace;
  int max_iters = 10;
  double phase_tol = 1e-4;           // radians
  double equalization_floor = 1e-3;  // relative to max_k |H_hat_k|
  bool refinement = true;

  void validate() const;
};

/// Equalized, de-precoded symbols d_hat (N x M) plus a per-bin reliability mask.
struct EqualizedBlocks {
  CMatrixXd symbols;
  std::vector<bool> reliable;

  std::size_t reliable_count() const;
};

/// d_hat(n) = W^{-1} (y(n) ./ H_hat). Bins with |H_hat_k| below the floor are
/// zeroed before de-precoding and flagged unreliable. Throws EstimatorFailure
/// when every bin is below the floor.
EqualizedBlocks equalize_and_deprecode(const CMatrixXd& y_blocks, const CVectorXd& response, const PrecoderXd& precoder,
                                       double floor);

/// Common phase offset theta of the channel estimate (H_hat ~ H e^{j theta}),
/// from the circular mean of arg d_hat(n,k) - c_{q(k)} over reliable bins.
/// The correction is H_hat <- H_hat e^{-j theta}. Region identity per
/// subcarrier makes theta identifiable over the whole circle.
double estimate_common_phase(const EqualizedBlocks& eq, const RegionPartition& partition);

/// Same estimator with the reference phase taken from per-symbol decisions
/// instead of region centers.
double estimate_decision_phase(const EqualizedBlocks& eq, const CMatrixXd& decisions);

/// Region-constrained hard decisions for every equalized symbol.
CMatrixXd decide_in_regions(const CMatrixXd& symbols, const RegionPartition& partition);

struct RefineResult {
  CVectorXd response;
  int iterations = 0;
  double residual_power = 0.0;  // mean |y - H_hat o x_hat|^2 of the returned iterate
};

/// Decision-directed refinement with decisions confined to each subcarrier's
/// region: equalize, decide, re-precode, per-bin least squares, then a
/// decision-directed common-phase touch-up. Stops when successive estimates
/// rotate by less than phase_tol, or returns the best iterate once the
/// residual power has risen two iterations running.
RefineResult mpd_refine(const CMatrixXd& y_blocks, const CVectorXd& initial, const PrecoderXd& precoder,
                        const RegionPartition& partition, const MpdConfig& cfg);

/// Completely blind estimate: first approximation (subspace direction scaled
/// by precoding-derived bin powers, or the precoding estimate), blind common
/// phase from region centers, optional refinement. `composite` is unused when
/// first_approx is Precoding.
ChannelEstimate hybrid_blind_estimate(const CovarianceXd& composite, const CovarianceXd& freq,
                                      const CMatrixXd& y_blocks, const OfdmConfig& ofdm, const PrecoderXd& precoder,
                                      const RegionPartition& partition, double sigma_n2, const MpdConfig& cfg);

}  // namespace ofdmblind
