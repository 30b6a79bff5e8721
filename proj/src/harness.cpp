#include "ofdmblind/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ofdmblind/channel.hpp"
#include "ofdmblind/constellation.hpp"
#include "ofdmblind/covariance.hpp"
#include "ofdmblind/model_statistics.hpp"
#include "ofdmblind/mpd.hpp"
#include "ofdmblind/precoder.hpp"

namespace ofdmblind {
namespace {

enum class Purpose : std::uint32_t { Channel = 1, Data = 2, Noise = 3 };

Rng make_rng(std::uint64_t seed, Purpose purpose, std::uint32_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose), stream};
  return Rng(seq);
}

struct Received {
  CMatrixXd y;          // N x M frequency blocks, warm-up symbol dropped
  CovarianceXd freq;
  CovarianceXd composite;
  bool has_composite = false;
};

/// Symbols for blocks 0..n_blocks (block 0 is the warm-up). Balanced mode
/// cycles through each region's points so every point occurs equally often.
CMatrixXd draw_symbols(const OfdmConfig& ofdm, const ConstellationSpec& c, const RegionPartition& part,
                       Eigen::Index n_blocks, bool balanced, Rng& rng) {
  const Eigen::Index n = ofdm.n_subcarriers;
  CMatrixXd d(n, n_blocks);
  const std::uint32_t levels = part.active() ? static_cast<std::uint32_t>(part.points_per_region())
                                             : static_cast<std::uint32_t>(c.order);
  std::uniform_int_distribution<std::uint32_t> pick(0, levels - 1);
  for (Eigen::Index b = 0; b < n_blocks; ++b) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      if (balanced) {
        const auto pos = static_cast<std::size_t>(b + k) % levels;
        d(k, b) = part.active() ? part.region_points[region_of_subcarrier(kk, part)][pos] : c.points[pos];
      } else {
        d(k, b) = map_value(pick(rng), kk, c, part);
      }
    }
  }
  return d;
}

Received transmit(const SimConfig& cfg, const OfdmConfig& ofdm, const ChannelRealization& channel,
                  const ConstellationSpec& c, const RegionPartition& part, const NoiseModel& noise,
                  bool want_composite, std::uint64_t seed, std::uint32_t stream) {
  const bool exact = cfg.statistics == StatisticsMode::Exact;
  Rng data_rng = make_rng(seed, Purpose::Data, stream);
  Rng noise_rng = make_rng(seed, Purpose::Noise, stream);
  const PrecoderXd precoder(ofdm.n_subcarriers, ofdm.precoding_p);

  const CMatrixXd d = draw_symbols(ofdm, c, part, cfg.n_blocks + 1, exact, data_rng);
  const CVectorXd tx = modulate_stream(precoder.apply(d), ofdm);
  const CVectorXd rx = transmit_stream(tx, channel.taps, noise, noise_rng);

  Received out;
  const CMatrixXd all = received_stream_to_freq_blocks(rx, ofdm);
  out.y = all.rightCols(cfg.n_blocks);
  out.has_composite = want_composite;
  if (exact) {
    const CVectorXd mu = subcarrier_means(static_cast<std::size_t>(ofdm.n_subcarriers), part);
    out.freq = exact_frequency_covariance(channel.response, precoder, mu, part.centered_variance, noise.sigma_n2);
    if (want_composite) {
      out.composite =
          exact_composite_covariance(channel.taps, ofdm, precoder, mu, part.centered_variance, noise.sigma_n2);
    }
  } else {
    out.freq = batch_covariance(out.y);
    if (want_composite) out.composite = batch_covariance(composite_blocks(rx, ofdm));
  }
  return out;
}

double noise_for_estimators(const SimConfig& cfg, const Received& rx, const NoiseModel& noise,
                            const OfdmConfig& ofdm) {
  if (cfg.noise_knowledge == NoiseKnowledge::Known) return noise.sigma_n2;
  return noise_variance_from_composite(rx.composite, ofdm);
}

std::string format_number(double v, const char* fmt) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

}  // namespace

Correction correction_for(Ambiguity ambiguity) {
  switch (ambiguity) {
    case Ambiguity::ComplexScalar:
      return Correction::Scalar;
    case Ambiguity::PhaseOnly:
      return Correction::Phase;
    case Ambiguity::Resolved:
      return Correction::None;
  }
  return Correction::None;
}

CVectorXd corrected_for_scoring(const ChannelEstimate& est, const CVectorXd& truth, Correction correction) {
  if (static_cast<int>(correction) > static_cast<int>(correction_for(est.ambiguity))) {
    throw std::logic_error("oracle correction not permitted for a " + to_string(est.ambiguity) + " estimate");
  }
  switch (correction) {
    case Correction::None:
      return est.response;
    case Correction::Phase:
      return oracle_align_phase(est.response, truth).corrected;
    case Correction::Scalar:
      return oracle_align_scalar(est.response, truth).corrected;
  }
  return est.response;
}

double score_estimate(const ChannelEstimate& est, const CVectorXd& truth, MseNormalization norm) {
  const CVectorXd corrected = corrected_for_scoring(est, truth, correction_for(est.ambiguity));
  const double err = (corrected - truth).squaredNorm();
  return norm == MseNormalization::Normalized ? err / truth.squaredNorm() : err / static_cast<double>(truth.size());
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

TrialOutcome run_trial(const SimConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const OfdmConfig& ofdm = cfg.ofdm;
  const ConstellationSpec constellation = constellation_from_name(ofdm.modulation);
  const RegionPartition partition = split_constellation(constellation, ofdm.splitting);
  const NoiseModel noise = NoiseModel::from_snr_db(cfg.snr_db);

  TrialOutcome outcome;
  Rng channel_rng = make_rng(seed, Purpose::Channel);
  const ChannelRealization channel = draw_channel(cfg.channel_pdp(), ofdm.n_subcarriers, channel_rng,
                                                  &outcome.channel_redraws);

  // The semi-blind subspace estimator runs on an unprecoded transmission
  // (W = I); precoding and hybrid share one transmission with W = P^{1/2}.
  const bool estimated_noise = cfg.noise_knowledge == NoiseKnowledge::Estimated;
  std::optional<Received> plain;
  std::optional<Received> precoded;
  auto plain_rx = [&]() -> const Received& {
    if (!plain) {
      OfdmConfig unprecoded = ofdm;
      unprecoded.precoding_p = 0.0;
      plain = transmit(cfg, unprecoded, channel, constellation, partition, noise, true, seed, 0);
    }
    return *plain;
  };
  auto precoded_rx = [&]() -> const Received& {
    if (!precoded) {
      const bool composite = estimated_noise ||
                             (cfg.uses(EstimatorKind::Hybrid) && cfg.mpd.first_approx == FirstApprox::Subspace);
      precoded = transmit(cfg, ofdm, channel, constellation, partition, noise, composite, seed, 1);
    }
    return *precoded;
  };

  for (EstimatorKind kind : cfg.estimators) {
    EstimatorScore score{kind, std::nullopt};
    try {
      ChannelEstimate est;
      switch (kind) {
        case EstimatorKind::Subspace: {
          est = subspace_estimate(plain_rx().composite, ofdm);
          break;
        }
        case EstimatorKind::Precoding: {
          const Received& rx = precoded_rx();
          const PrecoderXd precoder(ofdm.n_subcarriers, ofdm.precoding_p);
          est = precoding_estimate(rx.freq, precoder, noise_for_estimators(cfg, rx, noise, ofdm),
                                   partition.centered_variance);
          break;
        }
        case EstimatorKind::Hybrid: {
          const Received& rx = precoded_rx();
          const PrecoderXd precoder(ofdm.n_subcarriers, ofdm.precoding_p);
          est = hybrid_blind_estimate(rx.composite, rx.freq, rx.y, ofdm, precoder, partition,
                                      noise_for_estimators(cfg, rx, noise, ofdm), cfg.mpd);
          break;
        }
      }
      score.nmse = score_estimate(est, channel.response, cfg.mse_normalization);
    } catch (const EstimatorFailure&) {
      score.nmse.reset();
    }
    outcome.scores.push_back(score);
  }
  return outcome;
}

std::vector<TrialOutcome> run_trials_parallel(int n_trials, int workers, const std::function<TrialOutcome(int)>& fn) {
  std::vector<TrialOutcome> results(static_cast<std::size_t>(n_trials));
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto work = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_trials || failed.load()) return;
      try {
        results[static_cast<std::size_t>(i)] = fn(i);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
        return;
      }
    }
  };
  const int n_threads = std::max(1, std::min(workers, n_trials));
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return results;
}

std::vector<ReportRow> run_point(const SimConfig& cfg, SweepAxis axis) {
  cfg.validate();
  const auto outcomes = run_trials_parallel(cfg.n_trials, cfg.workers, [&](int t) {
    return run_trial(cfg, trial_seed(cfg.seed, static_cast<std::uint64_t>(t)));
  });

  std::vector<ReportRow> rows;
  for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
    ReportRow row;
    row.axis = to_string(axis);
    row.axis_value = axis == SweepAxis::Blocks ? static_cast<double>(cfg.n_blocks) : cfg.snr_db;
    row.estimator = to_string(cfg.estimators[e]);
    row.trials = cfg.n_trials;
    double sum = 0.0;
    double sum_sq = 0.0;
    int ok = 0;
    for (const auto& o : outcomes) {
      const auto& s = o.scores[e];
      if (!s.nmse) {
        ++row.failures;
        continue;
      }
      sum += *s.nmse;
      sum_sq += *s.nmse * *s.nmse;
      ++ok;
    }
    if (ok == 0) {
      row.nmse = std::numeric_limits<double>::quiet_NaN();
      row.stderr_nmse = std::numeric_limits<double>::quiet_NaN();
    } else {
      row.nmse = sum / ok;
      const double var = ok > 1 ? std::max(sum_sq - ok * row.nmse * row.nmse, 0.0) / (ok - 1) : 0.0;
      row.stderr_nmse = std::sqrt(var / ok);
    }
    row.nmse_db = 10.0 * std::log10(row.nmse);
    rows.push_back(row);
  }
  return rows;
}

SimReport run_sweep(const SimConfig& cfg, const SweepSpec& sweep) {
  sweep.validate();
  SimReport report;
  for (double v : sweep.values) {
    SimConfig point = cfg;
    if (sweep.axis == SweepAxis::Blocks) {
      point.n_blocks = static_cast<int>(v);
    } else {
      point.snr_db = v;
    }
    auto rows = run_point(point, sweep.axis);
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
  }
  return report;
}

std::string report_csv(const SimReport& report) {
  std::ostringstream out;
  out << "axis,axis_value,estimator,nmse,nmse_db,stderr,trials,failures\n";
  for (const auto& r : report.rows) {
    out << r.axis << ',' << format_number(r.axis_value, "%.12g") << ',' << r.estimator << ','
        << format_number(r.nmse, "%.12e") << ',' << format_number(r.nmse_db, "%.12f") << ','
        << format_number(r.stderr_nmse, "%.12e") << ',' << r.trials << ',' << r.failures << '\n';
  }
  return out.str();
}

std::filesystem::path emit_outputs(const SimReport& report, const std::filesystem::path& dir,
                                   const std::string& stem) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto csv_path = dir / (stem + ".csv");
  const auto plot_path = dir / (stem + ".gp");

  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
  csv << report_csv(report);
  if (!csv) throw std::runtime_error("write failed for " + csv_path.string());

  std::vector<std::string> estimators;
  std::set<std::string> seen;
  for (const auto& r : report.rows) {
    if (seen.insert(r.estimator).second) estimators.push_back(r.estimator);
  }
  const std::string axis = report.rows.empty() ? "blocks" : report.rows.front().axis;

  std::ofstream plot(plot_path, std::ios::binary);
  if (!plot) throw std::runtime_error("cannot write " + plot_path.string());
  plot << "# gnuplot script; run from this directory: gnuplot " << stem << ".gp\n"
       << "set datafile separator ','\n"
       << "set terminal pngcairo size 800,600\n"
       << "set output '" << stem << ".png'\n"
       << "set logscale y\n"
       << "set format y '10^{%L}'\n"
       << "set grid\n"
       << "set xlabel '" << (axis == "snr" ? "SNR (dB)" : "Length of OFDM blocks") << "'\n"
       << "set ylabel 'MSE'\n"
       << "set key top right\n"
       << "plot";
  for (std::size_t i = 0; i < estimators.size(); ++i) {
    plot << (i == 0 ? " " : ", \\\n     ") << "'" << stem << ".csv' every ::1 using 2:(strcol(3) eq '"
         << estimators[i] << "' ? $4 : 1/0) with linespoints title '" << estimators[i] << "'";
  }
  plot << '\n';
  if (!plot) throw std::runtime_error("write failed for " + plot_path.string());
  return csv_path;
}

}  // namespace ofdmblind
