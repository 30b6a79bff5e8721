#pragma once

#include <cmath>
#include <string>

#include <unsupported/Eigen/FFT>

#include "ofdmblind/constellation.hpp"
#include "ofdmblind/types.hpp"

namespace ofdmblind {

/// Frame geometry and transmitter selections.
struct OfdmConfig {
  int n_subcarriers = 64;  // N
  int cp_len = 2;          // P
  int channel_order = 2;   // L, channel has L+1 taps
  double precoding_p = 0.5;
  std::string modulation = "qam16";
  SplitMode splitting = SplitMode::None;

  Eigen::Index block_len() const { return n_subcarriers + cp_len; }

  /// Throws ConfigError unless N is a power of two, P >= L, N > 2(L+1), p in [0,1).
  void validate() const {
    const int n = n_subcarriers;
    if (n <= 0 || (n & (n - 1)) != 0) throw ConfigError("n_subcarriers must be a power of two");
    if (channel_order < 0) throw ConfigError("channel_order must be non-negative");
    if (cp_len < channel_order) throw ConfigError("cp_len must be >= channel_order");
    if (cp_len > n) throw ConfigError("cp_len must not exceed n_subcarriers");
    if (n <= 2 * (channel_order + 1)) throw ConfigError("n_subcarriers must exceed 2*(channel_order+1)");
    if (!(precoding_p >= 0.0 && precoding_p < 1.0)) throw ConfigError("precoding_p must lie in [0, 1)");
  }
};

namespace detail {
template <typename Real>
Eigen::FFT<Real>& fft_engine() {
  thread_local Eigen::FFT<Real> engine;
  engine.SetFlag(Eigen::FFT<Real>::Unscaled);
  return engine;
}
}  // namespace detail

/// u[m] = N^{-1/2} sum_k x[k] exp(+j 2 pi k m / N).
template <typename Derived>
CVector<typename Derived::RealScalar> unitary_idft(const Eigen::MatrixBase<Derived>& x) {
  using Real = typename Derived::RealScalar;
  CVector<Real> in = x;
  CVector<Real> out(in.size());
  detail::fft_engine<Real>().inv(out, in);
  out *= Real(1) / std::sqrt(static_cast<Real>(in.size()));
  return out;
}

/// X[k] = N^{-1/2} sum_m x[m] exp(-j 2 pi k m / N).
template <typename Derived>
CVector<typename Derived::RealScalar> unitary_dft(const Eigen::MatrixBase<Derived>& x) {
  using Real = typename Derived::RealScalar;
  CVector<Real> in = x;
  CVector<Real> out(in.size());
  detail::fft_engine<Real>().fwd(out, in);
  out *= Real(1) / std::sqrt(static_cast<Real>(in.size()));
  return out;
}

/// Prepends the last `cp_len` samples of the body.
template <typename Derived>
CVector<typename Derived::RealScalar> add_cp(const Eigen::MatrixBase<Derived>& body, Eigen::Index cp_len) {
  const Eigen::Index n = body.size();
  if (cp_len < 0 || cp_len > n) throw DimensionError("cyclic prefix longer than the block body");
  CVector<typename Derived::RealScalar> block(n + cp_len);
  block.head(cp_len) = body.tail(cp_len);
  block.tail(n) = body;
  return block;
}

template <typename Derived>
CVector<typename Derived::RealScalar> remove_cp(const Eigen::MatrixBase<Derived>& block, Eigen::Index cp_len) {
  if (cp_len < 0 || cp_len > block.size() - cp_len) throw DimensionError("cyclic prefix longer than the block body");
  return block.tail(block.size() - cp_len);
}

/// H_k = sum_l h_l exp(-j 2 pi k l / N): plain (non-unitary) DFT of the zero-padded taps.
template <typename Derived>
CVector<typename Derived::RealScalar> channel_freq_response(const Eigen::MatrixBase<Derived>& taps, Eigen::Index n) {
  using Real = typename Derived::RealScalar;
  if (taps.size() > n) throw DimensionError("more channel taps than subcarriers");
  CVector<Real> response(n);
  const Real step = Real(-2) * static_cast<Real>(kPi) / static_cast<Real>(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    Complex<Real> acc(0, 0);
    for (Eigen::Index l = 0; l < taps.size(); ++l) {
      // (k*l) mod n keeps the angle small and exact for large k*l.
      acc += taps[l] * std::polar(Real(1), step * static_cast<Real>((k * l) % n));
    }
    response[k] = acc;
  }
  return response;
}

/// x(n) (already precoded) -> s(n) = [CP; IDFT body].
template <typename Derived>
CVector<typename Derived::RealScalar> modulate_frame(const Eigen::MatrixBase<Derived>& x, const OfdmConfig& cfg) {
  if (x.size() != cfg.n_subcarriers) throw DimensionError("frequency block length differs from n_subcarriers");
  return add_cp(unitary_idft(x), cfg.cp_len);
}

/// Received block-aligned slice of N+P samples -> y(n).
template <typename Derived>
CVector<typename Derived::RealScalar> demodulate_frame(const Eigen::MatrixBase<Derived>& received,
                                                       const OfdmConfig& cfg) {
  if (received.size() != cfg.block_len()) throw DimensionError("received block length differs from N+P");
  return unitary_dft(remove_cp(received, cfg.cp_len));
}

/// Modulates every column of `x` (N x M precoded blocks) into one contiguous stream.
template <typename Derived>
CVector<typename Derived::RealScalar> modulate_stream(const Eigen::MatrixBase<Derived>& x, const OfdmConfig& cfg) {
  CVector<typename Derived::RealScalar> stream(cfg.block_len() * x.cols());
  for (Eigen::Index n = 0; n < x.cols(); ++n) {
    stream.segment(n * cfg.block_len(), cfg.block_len()) = modulate_frame(x.col(n), cfg);
  }
  return stream;
}

}  // namespace ofdmblind
