#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ofdmblind/channel.hpp"
#include "ofdmblind/mpd.hpp"
#include "ofdmblind/ofdm.hpp"

namespace ofdmblind {

enum class EstimatorKind { Subspace, Precoding, Hybrid };
enum class NoiseKnowledge { Known, Estimated };
/// Sampled: covariances from the simulated blocks. Exact: covariances from the
/// signal model (infinite-M surrogate) and balanced symbol sequences.
enum class StatisticsMode { Sampled, Exact };
enum class MseNormalization { Normalized, Absolute };
enum class SweepAxis { Blocks, Snr };

std::string to_string(EstimatorKind kind);
EstimatorKind estimator_from_name(std::string_view name);
std::string to_string(SweepAxis axis);
SweepAxis sweep_axis_from_name(std::string_view name);

struct SweepSpec {
  SweepAxis axis = SweepAxis::Blocks;
  std::vector<double> values;

  /// Throws ConfigError when empty or not strictly increasing.
  void validate() const;
  static SweepSpec default_for(SweepAxis axis);
};

struct SimConfig {
  OfdmConfig ofdm;
  PdpKind pdp = PdpKind::Exponential;
  double snr_db = 30.0;
  int n_blocks = 1000;
  int n_trials = 250;
  std::vector<EstimatorKind> estimators{EstimatorKind::Subspace, EstimatorKind::Precoding};
  NoiseKnowledge noise_knowledge = NoiseKnowledge::Known;
  MpdConfig mpd;
  std::uint64_t seed = 1;
  StatisticsMode statistics = StatisticsMode::Sampled;
  MseNormalization mse_normalization = MseNormalization::Normalized;
  int workers = 1;
  std::vector<double> sweep_values;  // empty: default grid for the chosen axis

  bool uses(EstimatorKind kind) const;
  ChannelPdp channel_pdp() const { return {pdp, ofdm.channel_order}; }
  void validate() const;
};

/// Builds a config from a flat JSON object. Keys absent from the object keep
/// their defaults (cp_len defaults to channel_order); unknown keys throw.
SimConfig config_from_json(const nlohmann::json& flat);
SimConfig load_config_file(const std::filesystem::path& path);

/// Applies "key=value" overrides; the value is parsed as JSON when possible,
/// otherwise taken as a string.
nlohmann::json apply_overrides(nlohmann::json flat, const std::vector<std::string>& assignments);

/// The flat JSON form of a config (round-trips through config_from_json).
nlohmann::json config_to_json(const SimConfig& cfg);

}  // namespace ofdmblind
