#pragma once

#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "ofdmblind/ofdm.hpp"
#include "ofdmblind/types.hpp"

namespace ofdmblind {

using Rng = std::mt19937_64;

enum class PdpKind { Exponential, Uniform };

PdpKind pdp_from_name(std::string_view name);

/// Power-delay profile: exponential E|h_l|^2 = exp(-l/10), uniform E|h_l|^2 = 1.
struct ChannelPdp {
  PdpKind kind = PdpKind::Exponential;
  int order = 2;

  VectorXd tap_variances() const;
};

/// Static channel taps plus their N-point frequency response.
struct ChannelRealization {
  CVectorXd taps;
  CVectorXd response;

  static ChannelRealization from_taps(const CVectorXd& taps, Eigen::Index n_subcarriers);
};

/// Per-sample complex noise variance sigma_n2 = E_tx / 10^(snr_db/10), with E_tx = 1.
struct NoiseModel {
  double snr_db = 30.0;
  double sigma_n2 = 1e-3;

  static NoiseModel from_snr_db(double snr_db);
  static NoiseModel noiseless();
  bool is_noiseless() const { return sigma_n2 == 0.0; }
};

/// Circularly-symmetric complex Gaussian sample with E|z|^2 = variance.
cd complex_gaussian(Rng& rng, double variance);

/// Independent taps, l-th tap CN(0, pdp variance l). Channels with
/// max_k |H_k| < 1e-6 ||H|| are redrawn; `redraws` counts them when given.
ChannelRealization draw_channel(const ChannelPdp& pdp, Eigen::Index n_subcarriers, Rng& rng,
                                int* redraws = nullptr);

/// Streaming FIR convolution y[t] = sum_l h_l x[t-l] whose memory carries
/// across calls; the state before the first call is zero.
template <typename Real>
class FirFilter {
 public:
  explicit FirFilter(CVector<Real> taps) : taps_(std::move(taps)), history_(CVector<Real>::Zero(taps_.size())) {}

  template <typename Derived>
  CVector<Real> process(const Eigen::MatrixBase<Derived>& input) {
    const Eigen::Index memory = taps_.size() - 1;
    CVector<Real> out(input.size());
    for (Eigen::Index t = 0; t < input.size(); ++t) {
      Complex<Real> acc = taps_[0] * input[t];
      for (Eigen::Index l = 1; l <= memory; ++l) {
        const Eigen::Index src = t - l;
        acc += taps_[l] * (src >= 0 ? input[src] : history_[memory + src]);
      }
      out[t] = acc;
    }
    // history_ holds the last `memory` inputs, oldest first.
    if (memory > 0) {
      CVector<Real> joined(memory + input.size());
      joined << history_.head(memory), input;
      history_.head(memory) = joined.tail(memory);
    }
    return out;
  }

 private:
  CVector<Real> taps_;
  CVector<Real> history_;
};

/// r[t] = sum_l h_l s[t-l] + n[t] over the concatenated stream.
CVectorXd transmit_stream(const CVectorXd& tx, const CVectorXd& taps, const NoiseModel& noise, Rng& rng);
CVectorXd transmit_stream(std::span<const CVectorXd> blocks, const CVectorXd& taps, const NoiseModel& noise,
                          Rng& rng);

/// Slices the stream into N+P sample blocks and demodulates each; columns of the result are y(n).
CMatrixXd received_stream_to_freq_blocks(const CVectorXd& received, const OfdmConfig& cfg);

}  // namespace ofdmblind
