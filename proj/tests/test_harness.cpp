#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ofdmblind/config.hpp"
#include "ofdmblind/harness.hpp"
#include "test_util.hpp"

using namespace ofdmblind;

namespace {

SimConfig quick_config() {
  SimConfig cfg;
  cfg.ofdm.n_subcarriers = 16;
  cfg.n_blocks = 60;
  cfg.n_trials = 12;
  return cfg;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config defaults and parsing") {
  const SimConfig def = config_from_json(nlohmann::json::object());
  CHECK(def.ofdm.n_subcarriers == 64);
  CHECK(def.ofdm.cp_len == 2);
  CHECK(def.ofdm.precoding_p == 0.5);
  CHECK(def.snr_db == 30.0);
  CHECK(def.n_blocks == 1000);
  CHECK(def.n_trials == 250);
  CHECK(def.mpd.max_iters == 10);

  const auto cfg = config_from_json(nlohmann::json::parse(
      R"({"channel_order": 4, "estimator": ["hybrid"], "splitting": "quadrant", "snr_db": "inf",
          "mpd.first_approx": "precoding", "mpd.refinement": "off"})"));
  CHECK(cfg.ofdm.cp_len == 4);
  CHECK(std::isinf(cfg.snr_db));
  CHECK(cfg.estimators == std::vector<EstimatorKind>{EstimatorKind::Hybrid});
  CHECK(cfg.mpd.first_approx == FirstApprox::Precoding);
  CHECK_FALSE(cfg.mpd.refinement);

  const auto back = config_from_json(config_to_json(cfg));
  CHECK(config_to_json(back) == config_to_json(cfg));
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"n_subcarrier": 64})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"n_subcarriers": "many"})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"n_subcarriers": 48})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"precoding_p": 1.0})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"estimator": "hybrid"})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"precoding_p": 0, "estimator": "precoding"})")),
                  ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"cp_len": 3})")), ConfigError);
  CHECK_NOTHROW(config_from_json(nlohmann::json::parse(R"({"cp_len": 3, "estimator": "precoding"})")));
}

TEST_CASE("key=value overrides") {
  const auto flat = apply_overrides(nlohmann::json::object(), {"snr_db=15", "modulation=psk4", "mpd.max_iters=3"});
  const auto cfg = config_from_json(flat);
  CHECK(cfg.snr_db == 15.0);
  CHECK(cfg.ofdm.modulation == "psk4");
  CHECK(cfg.mpd.max_iters == 3);
  CHECK_THROWS_AS(apply_overrides(nlohmann::json::object(), {"novalue"}), ConfigError);
}

TEST_CASE("sweep validation") {
  CHECK_THROWS_AS((SweepSpec{SweepAxis::Blocks, {}}.validate()), ConfigError);
  CHECK_THROWS_AS((SweepSpec{SweepAxis::Snr, {10, 5}}.validate()), ConfigError);
  CHECK_THROWS_AS((SweepSpec{SweepAxis::Blocks, {1, 5}}.validate()), ConfigError);
  CHECK_THROWS_AS((run_sweep(quick_config(), SweepSpec{SweepAxis::Blocks, {}})), ConfigError);
  CHECK(SweepSpec::default_for(SweepAxis::Snr).values.front() == 0.0);
  CHECK(SweepSpec::default_for(SweepAxis::Snr).values.back() == 35.0);
}

TEST_CASE("scoring respects the ambiguity tag") {
  CVectorXd truth = CVectorXd::Ones(4);
  ChannelEstimate est;
  est.response = cd(0, 2) * truth;
  est.ambiguity = Ambiguity::ComplexScalar;
  CHECK(score_estimate(est, truth, MseNormalization::Normalized) < 1e-24);
  est.ambiguity = Ambiguity::PhaseOnly;
  CHECK_THROWS_AS(corrected_for_scoring(est, truth, Correction::Scalar), std::logic_error);
  CHECK(score_estimate(est, truth, MseNormalization::Normalized) == doctest::Approx(1.0));
  est.ambiguity = Ambiguity::Resolved;
  CHECK_THROWS_AS(corrected_for_scoring(est, truth, Correction::Phase), std::logic_error);
  CHECK(score_estimate(est, truth, MseNormalization::Normalized) == doctest::Approx(5.0));
  CHECK(score_estimate(est, truth, MseNormalization::Absolute) == doctest::Approx(5.0));
}

TEST_CASE("trials are reproducible") {
  auto cfg = quick_config();
  cfg.ofdm.splitting = SplitMode::Quadrant;
  cfg.estimators = {EstimatorKind::Subspace, EstimatorKind::Precoding, EstimatorKind::Hybrid};
  const auto a = run_trial(cfg, 42);
  const auto b = run_trial(cfg, 42);
  REQUIRE(a.scores.size() == 3);
  for (int e = 0; e < 3; ++e) CHECK(a.scores[e].nmse == b.scores[e].nmse);
  CHECK(trial_seed(1, 0) != trial_seed(1, 1));
  CHECK(trial_seed(1, 0) != trial_seed(2, 0));
}

TEST_CASE("exact statistics without noise recover the channel") {
  auto cfg = quick_config();
  cfg.ofdm.splitting = SplitMode::Quadrant;
  cfg.estimators = {EstimatorKind::Subspace, EstimatorKind::Precoding, EstimatorKind::Hybrid};
  cfg.statistics = StatisticsMode::Exact;
  cfg.snr_db = std::numeric_limits<double>::infinity();
  cfg.n_blocks = 8;
  for (int t = 0; t < 5; ++t) {
    const auto out = run_trial(cfg, trial_seed(3, t));
    for (const auto& s : out.scores) {
      REQUIRE(s.nmse);
      CHECK(*s.nmse < 1e-10);
    }
  }
}

TEST_CASE("report layout and reproducible files") {
  auto cfg = quick_config();
  const SimReport report = run_sweep(cfg, SweepSpec{SweepAxis::Blocks, {40, 50, 60, 70, 80}});
  REQUIRE(report.rows.size() == 10);
  const auto csv = report_csv(report);
  const auto lines = split_lines(csv);
  REQUIRE(lines.size() == 11);
  CHECK(lines[0] == "axis,axis_value,estimator,nmse,nmse_db,stderr,trials,failures");
  for (const auto& r : report.rows) {
    CHECK(r.nmse_db == doctest::Approx(10 * std::log10(r.nmse)).epsilon(1e-12));
    CHECK(r.trials == cfg.n_trials);
  }

  const auto dir = std::filesystem::temp_directory_path() / "ofdmblind_harness_test";
  std::filesystem::remove_all(dir);
  const auto path = emit_outputs(report, dir, "a");
  CHECK(slurp(path) == csv);
  CHECK(std::filesystem::exists(dir / "a.gp"));
  const auto again = run_sweep(cfg, SweepSpec{SweepAxis::Blocks, {40, 50, 60, 70, 80}});
  CHECK(slurp(emit_outputs(again, dir, "b")) == csv);
  std::filesystem::remove_all(dir);
  CHECK_THROWS(emit_outputs(report, "/proc/ofdmblind_denied", "x"));
}

TEST_CASE("worker count does not change results") {
  auto cfg = quick_config();
  cfg.ofdm.splitting = SplitMode::Quadrant;
  cfg.estimators = {EstimatorKind::Subspace, EstimatorKind::Precoding, EstimatorKind::Hybrid};
  cfg.workers = 1;
  const auto one = report_csv(run_sweep(cfg, SweepSpec{SweepAxis::Snr, {10, 20}}));
  cfg.workers = 8;
  CHECK(report_csv(run_sweep(cfg, SweepSpec{SweepAxis::Snr, {10, 20}})) == one);
}

TEST_CASE("standard error shrinks as one over the square root of the trial count") {
  auto cfg = quick_config();
  cfg.estimators = {EstimatorKind::Precoding};
  cfg.n_trials = 50;
  const double se_small = run_point(cfg, SweepAxis::Blocks)[0].stderr_nmse;
  cfg.n_trials = 200;
  const double se_large = run_point(cfg, SweepAxis::Blocks)[0].stderr_nmse;
  CHECK(se_small / se_large > 1.4);
  CHECK(se_small / se_large < 2.8);
}

TEST_CASE("precoding error is non-increasing in the block count") {
  SimConfig cfg;
  cfg.estimators = {EstimatorKind::Precoding};
  const auto report = run_sweep(cfg, SweepSpec{SweepAxis::Blocks, {25, 100, 250, 1000}});
  for (std::size_t i = 1; i < report.rows.size(); ++i) CHECK(report.rows[i].nmse <= report.rows[i - 1].nmse);
}

TEST_CASE("blind phase is never better than the oracle phase on the same first approximation") {
  SimConfig cfg;
  cfg.ofdm.splitting = SplitMode::Quadrant;
  cfg.estimators = {EstimatorKind::Precoding, EstimatorKind::Hybrid};
  cfg.mpd.first_approx = FirstApprox::Precoding;
  cfg.mpd.refinement = false;
  cfg.n_blocks = 250;
  for (int t = 0; t < 40; ++t) {
    const auto out = run_trial(cfg, trial_seed(11, t));
    REQUIRE(out.scores[0].nmse);
    REQUIRE(out.scores[1].nmse);
    CHECK(*out.scores[1].nmse >= *out.scores[0].nmse * (1 - 1e-12));
  }
}

TEST_CASE("unknown keys in a config file are rejected") {
  const auto path = std::filesystem::temp_directory_path() / "ofdmblind_bad_config.json";
  std::ofstream(path) << R"({"n_subcarriers": 64, "colour": "blue"})";
  CHECK_THROWS_AS(load_config_file(path), ConfigError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_config_file("/nonexistent/ofdmblind.json"), ConfigError);
}
