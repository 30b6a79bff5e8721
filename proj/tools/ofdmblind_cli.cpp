// Command-line driver for the Monte-Carlo experiments.
//
//   ofdmblind run     [--config f] [--seed s] [--out dir] [--workers n] [--set key=value ...]
//   ofdmblind sweep   --axis blocks|snr [--values 25,100,...] [common flags]
//   ofdmblind compare [--axis blocks|snr] [--values ...] [common flags]

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ofdmblind/config.hpp"
#include "ofdmblind/harness.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "results";
  std::optional<int> workers;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "Flat JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", opts.seed, "Master seed (overrides the config)");
  cmd->add_option("--out", opts.out_dir, "Output directory for CSV and plot script");
  cmd->add_option("--workers", opts.workers, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--set", opts.overrides, "Config override key=value (repeatable)");
}

ofdmblind::SimConfig resolve_config(const CommonOptions& opts, const std::vector<std::string>& extra = {}) {
  nlohmann::json flat = nlohmann::json::object();
  if (!opts.config_path.empty()) {
    std::ifstream in(opts.config_path);
    flat = nlohmann::json::parse(in);
  }
  flat = ofdmblind::apply_overrides(flat, extra);
  flat = ofdmblind::apply_overrides(flat, opts.overrides);
  if (opts.seed) flat["seed"] = *opts.seed;
  if (opts.workers) flat["workers"] = *opts.workers;
  return ofdmblind::config_from_json(flat);
}

ofdmblind::SweepSpec resolve_sweep(const ofdmblind::SimConfig& cfg, const std::string& axis_name,
                                   const std::vector<double>& values) {
  const auto axis = ofdmblind::sweep_axis_from_name(axis_name);
  ofdmblind::SweepSpec spec = ofdmblind::SweepSpec::default_for(axis);
  if (!values.empty()) {
    spec.values = values;
  } else if (!cfg.sweep_values.empty()) {
    spec.values = cfg.sweep_values;
  }
  return spec;
}

void finish(const ofdmblind::SimReport& report, const std::string& out_dir, const std::string& stem) {
  const auto csv = ofdmblind::emit_outputs(report, out_dir, stem);
  std::cout << ofdmblind::report_csv(report);
  std::cerr << "wrote " << csv.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blind OFDM channel estimation Monte-Carlo laboratory"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  auto* run = app.add_subcommand("run", "Run all trials at a single operating point");
  add_common(run, run_opts);

  CommonOptions sweep_opts;
  std::string sweep_axis;
  std::vector<double> sweep_values;
  auto* sweep = app.add_subcommand("sweep", "Sweep block count or SNR");
  add_common(sweep, sweep_opts);
  sweep->add_option("--axis", sweep_axis, "blocks or snr")->required()->check(CLI::IsMember({"blocks", "snr"}));
  sweep->add_option("--values", sweep_values, "Sweep values (comma separated)")->delimiter(',');

  CommonOptions cmp_opts;
  std::string cmp_axis = "blocks";
  std::vector<double> cmp_values;
  auto* compare = app.add_subcommand("compare", "Subspace, precoding and hybrid estimators on one grid");
  add_common(compare, cmp_opts);
  compare->add_option("--axis", cmp_axis, "blocks or snr")->check(CLI::IsMember({"blocks", "snr"}));
  compare->add_option("--values", cmp_values, "Sweep values (comma separated)")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto cfg = resolve_config(run_opts);
      ofdmblind::SimReport report;
      report.rows = ofdmblind::run_point(cfg, ofdmblind::SweepAxis::Blocks);
      finish(report, run_opts.out_dir, "run");
    } else if (*sweep) {
      const auto cfg = resolve_config(sweep_opts);
      const auto spec = resolve_sweep(cfg, sweep_axis, sweep_values);
      finish(ofdmblind::run_sweep(cfg, spec), sweep_opts.out_dir, "sweep_" + sweep_axis);
    } else if (*compare) {
      // The hybrid estimator needs splitting; validation reports it if missing.
      const auto cfg = resolve_config(cmp_opts, {R"(estimator=["subspace","precoding","hybrid"])"});
      const auto spec = resolve_sweep(cfg, cmp_axis, cmp_values);
      finish(ofdmblind::run_sweep(cfg, spec), cmp_opts.out_dir, "compare_" + cmp_axis);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
