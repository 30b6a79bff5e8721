#include "ofdmblind/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

namespace ofdmblind {
namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "n_subcarriers", "cp_len",         "channel_order",   "precoding_p",          "modulation",
      "splitting",     "pdp",            "snr_db",          "seed",                 "estimator",
      "noise_knowledge", "n_blocks",     "n_trials",        "mpd.first_approx",     "mpd.max_iters",
      "mpd.phase_tol", "mpd.refinement", "mpd.equalization_floor", "mse_normalization", "statistics",
      "workers",       "sweep_values"};
  return keys;
}

double parse_snr(const nlohmann::json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "noiseless")) {
    return std::numeric_limits<double>::infinity();
  }
  throw ConfigError("snr_db must be a number or \"inf\"");
}

bool parse_switch(const nlohmann::json& v, const char* key) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "on") return true;
    if (s == "off") return false;
  }
  throw ConfigError(std::string(key) + " must be on/off or a boolean");
}

template <typename T>
T get_as(const nlohmann::json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

}  // namespace

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Subspace:
      return "subspace";
    case EstimatorKind::Precoding:
      return "precoding";
    case EstimatorKind::Hybrid:
      return "hybrid";
  }
  return "subspace";
}

EstimatorKind estimator_from_name(std::string_view name) {
  if (name == "subspace") return EstimatorKind::Subspace;
  if (name == "precoding") return EstimatorKind::Precoding;
  if (name == "hybrid") return EstimatorKind::Hybrid;
  throw ConfigError("unknown estimator '" + std::string(name) + "'");
}

std::string to_string(SweepAxis axis) { return axis == SweepAxis::Blocks ? "blocks" : "snr"; }

SweepAxis sweep_axis_from_name(std::string_view name) {
  if (name == "blocks") return SweepAxis::Blocks;
  if (name == "snr") return SweepAxis::Snr;
  throw ConfigError("unknown sweep axis '" + std::string(name) + "'");
}

void SweepSpec::validate() const {
  if (values.empty()) throw ConfigError("sweep has no values");
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] > values[i - 1])) throw ConfigError("sweep values must be strictly increasing");
  }
  if (axis == SweepAxis::Blocks) {
    for (double v : values) {
      if (v < 2 || v != std::floor(v)) throw ConfigError("block counts must be integers >= 2");
    }
  }
}

SweepSpec SweepSpec::default_for(SweepAxis axis) {
  if (axis == SweepAxis::Blocks) return {axis, {25, 50, 100, 250, 500, 1000}};
  return {axis, {0, 5, 10, 15, 20, 25, 30, 35}};
}

bool SimConfig::uses(EstimatorKind kind) const {
  return std::find(estimators.begin(), estimators.end(), kind) != estimators.end();
}

void SimConfig::validate() const {
  ofdm.validate();
  if (n_trials < 1) throw ConfigError("n_trials must be >= 1");
  if (n_blocks < 2) throw ConfigError("n_blocks must be >= 2");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (estimators.empty()) throw ConfigError("no estimator selected");
  mpd.validate();
  // Throws on unknown modulation or axis-degenerate splits.
  split_constellation(constellation_from_name(ofdm.modulation), ofdm.splitting);

  const bool needs_composite = uses(EstimatorKind::Subspace) ||
                               (uses(EstimatorKind::Hybrid) && mpd.first_approx == FirstApprox::Subspace) ||
                               noise_knowledge == NoiseKnowledge::Estimated;
  if (needs_composite && ofdm.cp_len != ofdm.channel_order) {
    throw ConfigError("the subspace estimator needs cp_len == channel_order");
  }
  if (uses(EstimatorKind::Precoding) && ofdm.precoding_p == 0.0) {
    throw ConfigError("the precoding estimator needs precoding_p > 0");
  }
  if (uses(EstimatorKind::Hybrid) && ofdm.splitting == SplitMode::None) {
    throw ConfigError("the hybrid estimator needs constellation splitting");
  }
  if (!sweep_values.empty()) {
    SweepSpec{SweepAxis::Snr, sweep_values}.validate();
  }
}

SimConfig config_from_json(const nlohmann::json& flat) {
  if (!flat.is_object()) throw ConfigError("config must be a flat JSON object");
  for (const auto& [key, value] : flat.items()) {
    if (!known_keys().contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  SimConfig cfg;
  auto has = [&](const char* key) { return flat.contains(key); };

  if (has("n_subcarriers")) cfg.ofdm.n_subcarriers = get_as<int>(flat["n_subcarriers"], "n_subcarriers");
  if (has("channel_order")) cfg.ofdm.channel_order = get_as<int>(flat["channel_order"], "channel_order");
  cfg.ofdm.cp_len = has("cp_len") ? get_as<int>(flat["cp_len"], "cp_len") : cfg.ofdm.channel_order;
  if (has("precoding_p")) cfg.ofdm.precoding_p = get_as<double>(flat["precoding_p"], "precoding_p");
  if (has("modulation")) cfg.ofdm.modulation = get_as<std::string>(flat["modulation"], "modulation");
  if (has("splitting")) cfg.ofdm.splitting = split_mode_from_name(get_as<std::string>(flat["splitting"], "splitting"));
  if (has("pdp")) cfg.pdp = pdp_from_name(get_as<std::string>(flat["pdp"], "pdp"));
  if (has("snr_db")) cfg.snr_db = parse_snr(flat["snr_db"]);
  if (has("seed")) cfg.seed = get_as<std::uint64_t>(flat["seed"], "seed");
  if (has("estimator")) {
    const auto& v = flat["estimator"];
    cfg.estimators.clear();
    if (v.is_array()) {
      for (const auto& e : v) cfg.estimators.push_back(estimator_from_name(get_as<std::string>(e, "estimator")));
    } else {
      cfg.estimators.push_back(estimator_from_name(get_as<std::string>(v, "estimator")));
    }
  }
  if (has("noise_knowledge")) {
    const auto s = get_as<std::string>(flat["noise_knowledge"], "noise_knowledge");
    if (s == "known") {
      cfg.noise_knowledge = NoiseKnowledge::Known;
    } else if (s == "estimated") {
      cfg.noise_knowledge = NoiseKnowledge::Estimated;
    } else {
      throw ConfigError("noise_knowledge must be known or estimated");
    }
  }
  if (has("n_blocks")) cfg.n_blocks = get_as<int>(flat["n_blocks"], "n_blocks");
  if (has("n_trials")) cfg.n_trials = get_as<int>(flat["n_trials"], "n_trials");
  if (has("mpd.first_approx")) {
    cfg.mpd.first_approx = first_approx_from_name(get_as<std::string>(flat["mpd.first_approx"], "mpd.first_approx"));
  }
  if (has("mpd.max_iters")) cfg.mpd.max_iters = get_as<int>(flat["mpd.max_iters"], "mpd.max_iters");
  if (has("mpd.phase_tol")) cfg.mpd.phase_tol = get_as<double>(flat["mpd.phase_tol"], "mpd.phase_tol");
  if (has("mpd.refinement")) cfg.mpd.refinement = parse_switch(flat["mpd.refinement"], "mpd.refinement");
  if (has("mpd.equalization_floor")) {
    cfg.mpd.equalization_floor = get_as<double>(flat["mpd.equalization_floor"], "mpd.equalization_floor");
  }
  if (has("mse_normalization")) {
    const auto s = get_as<std::string>(flat["mse_normalization"], "mse_normalization");
    if (s == "normalized") {
      cfg.mse_normalization = MseNormalization::Normalized;
    } else if (s == "absolute") {
      cfg.mse_normalization = MseNormalization::Absolute;
    } else {
      throw ConfigError("mse_normalization must be normalized or absolute");
    }
  }
  if (has("statistics")) {
    const auto s = get_as<std::string>(flat["statistics"], "statistics");
    if (s == "sampled") {
      cfg.statistics = StatisticsMode::Sampled;
    } else if (s == "exact") {
      cfg.statistics = StatisticsMode::Exact;
    } else {
      throw ConfigError("statistics must be sampled or exact");
    }
  }
  if (has("workers")) cfg.workers = get_as<int>(flat["workers"], "workers");
  if (has("sweep_values")) cfg.sweep_values = get_as<std::vector<double>>(flat["sweep_values"], "sweep_values");
  cfg.validate();
  return cfg;
}

SimConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  nlohmann::json flat;
  try {
    flat = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("malformed config file " + path.string() + ": " + e.what());
  }
  return config_from_json(flat);
}

nlohmann::json apply_overrides(nlohmann::json flat, const std::vector<std::string>& assignments) {
  if (flat.is_null()) flat = nlohmann::json::object();
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + a + "' is not key=value");
    const std::string key = a.substr(0, eq);
    const std::string raw = a.substr(eq + 1);
    nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
    flat[key] = value.is_discarded() ? nlohmann::json(raw) : value;
  }
  return flat;
}

nlohmann::json config_to_json(const SimConfig& cfg) {
  nlohmann::json j;
  j["n_subcarriers"] = cfg.ofdm.n_subcarriers;
  j["cp_len"] = cfg.ofdm.cp_len;
  j["channel_order"] = cfg.ofdm.channel_order;
  j["precoding_p"] = cfg.ofdm.precoding_p;
  j["modulation"] = cfg.ofdm.modulation;
  j["splitting"] = to_string(cfg.ofdm.splitting);
  j["pdp"] = cfg.pdp == PdpKind::Exponential ? "exponential" : "uniform";
  if (std::isinf(cfg.snr_db)) {
    j["snr_db"] = "inf";
  } else {
    j["snr_db"] = cfg.snr_db;
  }
  j["seed"] = cfg.seed;
  j["estimator"] = nlohmann::json::array();
  for (auto e : cfg.estimators) j["estimator"].push_back(to_string(e));
  j["noise_knowledge"] = cfg.noise_knowledge == NoiseKnowledge::Known ? "known" : "estimated";
  j["n_blocks"] = cfg.n_blocks;
  j["n_trials"] = cfg.n_trials;
  j["mpd.first_approx"] = cfg.mpd.first_approx == FirstApprox::Subspace ? "subspace" : "precoding";
  j["mpd.max_iters"] = cfg.mpd.max_iters;
  j["mpd.phase_tol"] = cfg.mpd.phase_tol;
  j["mpd.refinement"] = cfg.mpd.refinement ? "on" : "off";
  j["mpd.equalization_floor"] = cfg.mpd.equalization_floor;
  j["mse_normalization"] = cfg.mse_normalization == MseNormalization::Normalized ? "normalized" : "absolute";
  j["statistics"] = cfg.statistics == StatisticsMode::Sampled ? "sampled" : "exact";
  j["workers"] = cfg.workers;
  if (!cfg.sweep_values.empty()) j["sweep_values"] = cfg.sweep_values;
  return j;
}

}  // namespace ofdmblind
