#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ofdmblind/config.hpp"
#include "ofdmblind/estimators.hpp"

namespace ofdmblind {

/// Oracle correction applied before scoring. Stronger corrections than an
/// estimate's ambiguity tag allows are refused.
enum class Correction { None, Phase, Scalar };

Correction correction_for(Ambiguity ambiguity);

/// Applies `correction` using the true response. Throws std::logic_error when
/// the estimate's ambiguity tag does not permit it (e.g. any correction of a
/// resolved estimate).
CVectorXd corrected_for_scoring(const ChannelEstimate& est, const CVectorXd& truth, Correction correction);

/// ||H_corr - H||^2 / ||H||^2 (normalized) or / N (absolute), with the
/// correction implied by the estimate's ambiguity tag.
double score_estimate(const ChannelEstimate& est, const CVectorXd& truth, MseNormalization norm);

struct EstimatorScore {
  EstimatorKind estimator;
  std::optional<double> nmse;  // empty when the estimator failed this trial
};

struct TrialOutcome {
  std::vector<EstimatorScore> scores;  // in cfg.estimators order
  int channel_redraws = 0;
};

/// Seed of trial `trial` under `master`; independent of worker count and of
/// the sweep point, so every point of a sweep sees the same channel draws.
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial);

/// One channel draw, one transmission of n_blocks symbols (plus a leading
/// warm-up symbol), every selected estimator scored.
TrialOutcome run_trial(const SimConfig& cfg, std::uint64_t seed);

struct ReportRow {
  std::string axis;
  double axis_value = 0.0;
  std::string estimator;
  double nmse = 0.0;
  double nmse_db = 0.0;
  double stderr_nmse = 0.0;
  int trials = 0;
  int failures = 0;
};

struct SimReport {
  std::vector<ReportRow> rows;  // sweep point major, estimator minor
};

/// Runs n_trials trials of `fn(trial)` over `workers` threads. Results are
/// stored by trial index, so the output is independent of scheduling.
std::vector<TrialOutcome> run_trials_parallel(int n_trials, int workers,
                                              const std::function<TrialOutcome(int)>& fn);

/// All trials at the config's own operating point, reported on `axis`.
std::vector<ReportRow> run_point(const SimConfig& cfg, SweepAxis axis);

SimReport run_sweep(const SimConfig& cfg, const SweepSpec& sweep);

/// Writes <stem>.csv and a gnuplot script <stem>.gp into `dir`. Returns the CSV path.
std::filesystem::path emit_outputs(const SimReport& report, const std::filesystem::path& dir,
                                   const std::string& stem);

/// CSV text exactly as written by emit_outputs.
std::string report_csv(const SimReport& report);

}  // namespace ofdmblind
