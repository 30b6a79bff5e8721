#include "ofdmblind/channel.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace ofdmblind {

PdpKind pdp_from_name(std::string_view name) {
  if (name == "exponential") return PdpKind::Exponential;
  if (name == "uniform") return PdpKind::Uniform;
  throw ConfigError("unknown pdp '" + std::string(name) + "'");
}

VectorXd ChannelPdp::tap_variances() const {
  VectorXd var(order + 1);
  for (int l = 0; l <= order; ++l) {
    var[l] = kind == PdpKind::Exponential ? std::exp(-static_cast<double>(l) / 10.0) : 1.0;
  }
  return var;
}

ChannelRealization ChannelRealization::from_taps(const CVectorXd& taps, Eigen::Index n_subcarriers) {
  return {taps, channel_freq_response(taps, n_subcarriers)};
}

NoiseModel NoiseModel::from_snr_db(double snr_db) {
  NoiseModel m;
  m.snr_db = snr_db;
  m.sigma_n2 = std::isinf(snr_db) && snr_db > 0 ? 0.0 : std::pow(10.0, -snr_db / 10.0);
  return m;
}

NoiseModel NoiseModel::noiseless() { return from_snr_db(std::numeric_limits<double>::infinity()); }

cd complex_gaussian(Rng& rng, double variance) {
  std::normal_distribution<double> gauss(0.0, std::sqrt(variance / 2.0));
  const double re = gauss(rng);
  const double im = gauss(rng);
  return {re, im};
}

ChannelRealization draw_channel(const ChannelPdp& pdp, Eigen::Index n_subcarriers, Rng& rng, int* redraws) {
  const VectorXd var = pdp.tap_variances();
  for (;;) {
    CVectorXd taps(var.size());
    for (Eigen::Index l = 0; l < var.size(); ++l) taps[l] = complex_gaussian(rng, var[l]);
    ChannelRealization ch = ChannelRealization::from_taps(taps, n_subcarriers);
    if (ch.response.cwiseAbs().maxCoeff() >= 1e-6 * ch.response.norm()) return ch;
    if (redraws != nullptr) ++*redraws;
  }
}

CVectorXd transmit_stream(const CVectorXd& tx, const CVectorXd& taps, const NoiseModel& noise, Rng& rng) {
  FirFilter<double> fir(taps);
  CVectorXd r = fir.process(tx);
  if (!noise.is_noiseless()) {
    for (Eigen::Index t = 0; t < r.size(); ++t) r[t] += complex_gaussian(rng, noise.sigma_n2);
  }
  return r;
}

CVectorXd transmit_stream(std::span<const CVectorXd> blocks, const CVectorXd& taps, const NoiseModel& noise,
                          Rng& rng) {
  Eigen::Index total = 0;
  for (const auto& b : blocks) total += b.size();
  CVectorXd tx(total);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    tx.segment(at, b.size()) = b;
    at += b.size();
  }
  return transmit_stream(tx, taps, noise, rng);
}

CMatrixXd received_stream_to_freq_blocks(const CVectorXd& received, const OfdmConfig& cfg) {
  const Eigen::Index len = cfg.block_len();
  if (received.size() % len != 0) throw DimensionError("stream length is not a multiple of N+P");
  const Eigen::Index m = received.size() / len;
  CMatrixXd y(cfg.n_subcarriers, m);
  for (Eigen::Index n = 0; n < m; ++n) y.col(n) = demodulate_frame(received.segment(n * len, len), cfg);
  return y;
}

}  // namespace ofdmblind
