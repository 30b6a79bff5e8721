#include "ofdmblind/mpd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ofdmblind {

FirstApprox first_approx_from_name(std::string_view name) {
  if (name == "subspace") return FirstApprox::Subspace;
  if (name == "precoding") return FirstApprox::Precoding;
  throw ConfigError("unknown mpd.first_approx '" + std::string(name) + "'");
}

void MpdConfig::validate() const {
  if (max_iters < 1) throw ConfigError("mpd.max_iters must be >= 1");
  if (!(equalization_floor > 0.0)) throw ConfigError("mpd equalization floor must be positive");
  if (!(phase_tol > 0.0)) throw ConfigError("mpd.phase_tol must be positive");
}

std::size_t EqualizedBlocks::reliable_count() const {
  return static_cast<std::size_t>(std::count(reliable.begin(), reliable.end(), true));
}

EqualizedBlocks equalize_and_deprecode(const CMatrixXd& y_blocks, const CVectorXd& response, const PrecoderXd& precoder,
                                       double floor) {
  if (response.size() != y_blocks.rows()) throw DimensionError("channel estimate length differs from block length");
  const double threshold = floor * response.cwiseAbs().maxCoeff();
  EqualizedBlocks eq;
  eq.reliable.resize(static_cast<std::size_t>(response.size()));
  CVectorXd inv_gain(response.size());
  for (Eigen::Index k = 0; k < response.size(); ++k) {
    const bool ok = std::abs(response[k]) >= threshold && std::abs(response[k]) > 0.0;
    eq.reliable[static_cast<std::size_t>(k)] = ok;
    inv_gain[k] = ok ? 1.0 / response[k] : cd{};
  }
  if (eq.reliable_count() == 0) throw EstimatorFailure("every bin is below the equalization floor");
  eq.symbols = precoder.inverse(inv_gain.asDiagonal() * y_blocks);
  return eq;
}

double estimate_common_phase(const EqualizedBlocks& eq, const RegionPartition& partition) {
  if (!partition.active()) throw ConfigError("blind phase resolution needs constellation splitting");
  cd acc{};
  for (Eigen::Index k = 0; k < eq.symbols.rows(); ++k) {
    if (!eq.reliable[static_cast<std::size_t>(k)]) continue;
    const cd center = std::polar(1.0, -partition.centers[region_of_subcarrier(static_cast<std::size_t>(k), partition)]);
    for (Eigen::Index n = 0; n < eq.symbols.cols(); ++n) {
      const cd z = eq.symbols(k, n);
      const double mag = std::abs(z);
      if (mag > 0.0) acc += z / mag * center;
    }
  }
  if (std::abs(acc) == 0.0) throw EstimatorFailure("no phase residuals to average");
  return -std::arg(acc);
}

double estimate_decision_phase(const EqualizedBlocks& eq, const CMatrixXd& decisions) {
  cd acc{};
  for (Eigen::Index k = 0; k < eq.symbols.rows(); ++k) {
    if (!eq.reliable[static_cast<std::size_t>(k)]) continue;
    for (Eigen::Index n = 0; n < eq.symbols.cols(); ++n) {
      const cd z = eq.symbols(k, n) * std::conj(decisions(k, n));
      const double mag = std::abs(z);
      if (mag > 0.0) acc += z / mag;
    }
  }
  if (std::abs(acc) == 0.0) throw EstimatorFailure("no phase residuals to average");
  return -std::arg(acc);
}

CMatrixXd decide_in_regions(const CMatrixXd& symbols, const RegionPartition& partition) {
  CMatrixXd out(symbols.rows(), symbols.cols());
  for (Eigen::Index k = 0; k < symbols.rows(); ++k) {
    const std::size_t region = region_of_subcarrier(static_cast<std::size_t>(k), partition);
    for (Eigen::Index n = 0; n < symbols.cols(); ++n) {
      out(k, n) = hard_decide_in_region(symbols(k, n), region, partition);
    }
  }
  return out;
}

RefineResult mpd_refine(const CMatrixXd& y_blocks, const CVectorXd& initial, const PrecoderXd& precoder,
                        const RegionPartition& partition, const MpdConfig& cfg) {
  cfg.validate();
  RefineResult best{initial, 0, std::numeric_limits<double>::infinity()};
  CVectorXd current = initial;
  double previous = std::numeric_limits<double>::infinity();
  int rises = 0;
  const double scale = 1.0 / static_cast<double>(y_blocks.size());

  for (int it = 1; it <= cfg.max_iters; ++it) {
    const EqualizedBlocks eq = equalize_and_deprecode(y_blocks, current, precoder, cfg.equalization_floor);
    const CMatrixXd decisions = decide_in_regions(eq.symbols, partition);
    const CMatrixXd x_hat = precoder.apply(decisions);

    CVectorXd next(current.size());
    for (Eigen::Index k = 0; k < next.size(); ++k) {
      const double energy = x_hat.row(k).squaredNorm();
      next[k] = energy > 0.0 ? x_hat.row(k).dot(y_blocks.row(k)) / energy : current[k];
    }
    const double residual = (y_blocks - next.asDiagonal() * x_hat).squaredNorm() * scale;

    const EqualizedBlocks check = equalize_and_deprecode(y_blocks, next, precoder, cfg.equalization_floor);
    next *= std::polar(1.0, -estimate_decision_phase(check, decisions));

    const double rotation = std::abs(std::arg(current.dot(next)));
    current = next;
    if (residual < best.residual_power) best = {current, it, residual};
    rises = residual > previous ? rises + 1 : 0;
    previous = residual;
    if (rises >= 2) return best;
    if (rotation < cfg.phase_tol) return {current, it, residual};
  }
  return {current, cfg.max_iters, previous};
}

ChannelEstimate hybrid_blind_estimate(const CovarianceXd& composite, const CovarianceXd& freq,
                                      const CMatrixXd& y_blocks, const OfdmConfig& ofdm, const PrecoderXd& precoder,
                                      const RegionPartition& partition, double sigma_n2, const MpdConfig& cfg) {
  cfg.validate();
  if (!partition.active()) throw ConfigError("the blind estimator needs constellation splitting");
  const double sigma_c2 = partition.centered_variance;

  ChannelEstimate est;
  if (cfg.first_approx == FirstApprox::Subspace) {
    est = subspace_estimate(composite, ofdm);
    const CVectorXd mu = subcarrier_means(static_cast<std::size_t>(ofdm.n_subcarriers), partition);
    const VectorXd power = estimate_bin_magnitudes(freq, precoder, mu, sigma_n2, sigma_c2);
    const double energy = est.response.squaredNorm();
    if (!(power.sum() > 0.0) || energy == 0.0) throw EstimatorFailure("no received signal power");
    est.response *= std::sqrt(power.sum() / energy);
  } else {
    // sigma_c2 of a singleton region is zero; the centered covariance then carries no signal.
    if (!(sigma_c2 > 0.0)) throw ConfigError("precoding first approximation needs more than one point per region");
    est = precoding_estimate(freq, precoder, sigma_n2, sigma_c2);
  }
  est.taps.reset();

  const EqualizedBlocks eq = equalize_and_deprecode(y_blocks, est.response, precoder, cfg.equalization_floor);
  const double theta = estimate_common_phase(eq, partition);
  est.response *= std::polar(1.0, -theta);
  est.diagnostics.phase_correction = theta;

  if (cfg.refinement) {
    RefineResult refined = mpd_refine(y_blocks, est.response, precoder, partition, cfg);
    est.response = std::move(refined.response);
    est.diagnostics.iterations = refined.iterations;
  }
  est.ambiguity = Ambiguity::Resolved;
  return est;
}

}  // namespace ofdmblind
