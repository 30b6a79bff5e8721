#include <doctest.h>

#include <random>

#include "ofdmblind/channel.hpp"
#include "ofdmblind/constellation.hpp"
#include "ofdmblind/covariance.hpp"
#include "ofdmblind/estimators.hpp"
#include "ofdmblind/model_statistics.hpp"
#include "test_util.hpp"

using namespace ofdmblind;
using testutil::nmse;
using testutil::random_cvector;

namespace {

OfdmConfig small_config(int n = 16, int l = 2) {
  OfdmConfig cfg;
  cfg.n_subcarriers = n;
  cfg.cp_len = l;
  cfg.channel_order = l;
  return cfg;
}

struct Link {
  CMatrixXd x;         // precoded blocks
  CVectorXd received;  // time-domain stream
};

Link simulate(const OfdmConfig& cfg, const CVectorXd& taps, const PrecoderXd& w, int blocks, double sigma_n2,
              Rng& rng) {
  const auto c = constellation_from_name(cfg.modulation);
  const auto part = split_constellation(c, cfg.splitting);
  std::uniform_int_distribution<std::uint32_t> pick(0, (1u << part.bits_per_symbol()) - 1);
  CMatrixXd d(cfg.n_subcarriers, blocks);
  for (Eigen::Index n = 0; n < blocks; ++n)
    for (Eigen::Index k = 0; k < cfg.n_subcarriers; ++k) d(k, n) = map_value(pick(rng), k, c, part);
  Link link;
  link.x = w.apply(d);
  NoiseModel noise;
  noise.sigma_n2 = sigma_n2;
  link.received = transmit_stream(modulate_stream(link.x, cfg), taps, noise, rng);
  return link;
}

}  // namespace

TEST_CASE("composite blocks slide over symbol pairs") {
  const auto cfg = small_config(8, 1);
  CVectorXd stream(5 * cfg.block_len());
  for (Eigen::Index i = 0; i < stream.size(); ++i) stream[i] = double(i);
  const CMatrixXd comp = composite_blocks(stream, cfg);
  REQUIRE(comp.rows() == 17);
  REQUIRE(comp.cols() == 4);
  CHECK(comp(0, 0).real() == 1.0);
  CHECK(comp(0, 2).real() == 2 * 9 + 1.0);
  CHECK(comp(16, 3).real() == 3 * 9 + 1 + 16.0);
  CHECK_THROWS_AS(composite_blocks(stream.head(9), cfg), DimensionError);
  auto bad = cfg;
  bad.cp_len = 2;
  CHECK_THROWS_AS(composite_blocks(CVectorXd::Zero(50), bad), DimensionError);
}

TEST_CASE("composite channel matrix reproduces the received window") {
  const auto cfg = small_config();
  Rng rng(61);
  const CVectorXd h = random_cvector(3, rng);
  const PrecoderXd w(16, 0.5);
  const Link link = simulate(cfg, h, w, 10, 0.0, rng);
  const CMatrixXd comp = composite_blocks(link.received, cfg);
  const CMatrixXd hmat = build_conv_matrix(h, cfg);
  for (Eigen::Index n = 1; n < 10; ++n) {
    CVectorXd bodies(32);
    bodies << unitary_idft(link.x.col(n - 1)), unitary_idft(link.x.col(n));
    CHECK((comp.col(n - 1) - hmat * bodies).norm() < 1e-10);
  }
  Eigen::JacobiSVD<CMatrixXd> svd(hmat);
  CHECK(svd.singularValues().minCoeff() > 1e-6);
  CHECK_THROWS_AS(build_conv_matrix(random_cvector(2, rng), cfg), DimensionError);
}

TEST_CASE("identity channel with no memory leaves the bodies untouched") {
  const auto cfg = small_config(8, 0);
  CVectorXd one(1);
  one << 1.0;
  const CMatrixXd hmat = build_conv_matrix(one, cfg);
  CHECK((hmat - CMatrixXd::Identity(16, 16)).norm() == 0.0);
}

TEST_CASE("streaming and batch covariance agree") {
  Rng rng(67);
  CMatrixXd samples(6, 400);
  for (Eigen::Index i = 0; i < 400; ++i) samples.col(i) = random_cvector(6, rng) + cd(1.0, -2.0) * CVectorXd::Ones(6);
  CovarianceAccumulator<double> acc(6);
  for (Eigen::Index i = 0; i < 400; ++i) acc.add(samples.col(i));
  const auto a = acc.finish();
  const auto b = batch_covariance(samples);
  CHECK((a.cov - b.cov).norm() < 1e-12);
  CHECK((a.mean - b.mean).norm() < 1e-12);
  CHECK((b.cov - b.cov.adjoint()).norm() < 1e-14);
  Eigen::SelfAdjointEigenSolver<CMatrixXd> eig(b.cov);
  CHECK(eig.eigenvalues().minCoeff() > -1e-12);
  CHECK_THROWS_AS(CovarianceAccumulator<double>(3).finish(), DimensionError);
}

TEST_CASE("subspace estimator is exact on model statistics") {
  for (SplitMode split : {SplitMode::None, SplitMode::Quadrant}) {
    for (double p : {0.0, 0.5}) {
      auto cfg = small_config();
      cfg.splitting = split;
      const auto part = split_constellation(constellation_from_name("qam16"), split);
      const PrecoderXd w(16, p);
      Rng rng(71);
      const CVectorXd h = random_cvector(3, rng);
      const double sc2 = split == SplitMode::None ? 1.0 : part.centered_variance;
      for (double s2 : {0.0, 1e-2}) {
        const auto cov = exact_composite_covariance(h, cfg, w, subcarrier_means(16, part), sc2, s2);
        const auto est = subspace_estimate(cov, cfg);
        CHECK(est.ambiguity == Ambiguity::ComplexScalar);
        REQUIRE(est.taps);
        const CVectorXd resp = channel_freq_response(h, 16);
        CHECK(nmse(oracle_align_scalar(est.response, resp).corrected, resp) < 1e-10);
        CHECK(std::abs(est.taps->norm() - 1.0) < 1e-12);
        CHECK(est.diagnostics.residual_eigenvalue < 1e-10);
      }
    }
  }
}

TEST_CASE("subspace estimator refuses rank-deficient sample covariances") {
  const auto cfg = small_config();
  Rng rng(73);
  const CVectorXd h = random_cvector(3, rng);
  const PrecoderXd w(16, 0.0);
  // 2N+L = 34: 35 blocks give 34 composite vectors, one short of full rank.
  const Link link = simulate(cfg, h, w, 35, 1e-3, rng);
  const auto cov = batch_covariance(composite_blocks(link.received, cfg));
  CHECK_THROWS_AS(subspace_estimate(cov, cfg), EstimatorFailure);
  CHECK_NOTHROW(subspace_estimate(cov, cfg, SubspaceOptions{false}));
  const Link more = simulate(cfg, h, w, 36, 1e-3, rng);
  CHECK_NOTHROW(subspace_estimate(batch_covariance(composite_blocks(more.received, cfg)), cfg));
}

TEST_CASE("subspace error drops sharply once the covariance has full rank") {
  const auto cfg = small_config();
  const PrecoderXd w(16, 0.0);
  const int dim = 34;
  double below = 0.0, above = 0.0;
  const int trials = 40;
  for (int t = 0; t < trials; ++t) {
    Rng rng(1000 + t);
    const auto ch = draw_channel({PdpKind::Exponential, 2}, 16, rng);
    const Link low = simulate(cfg, ch.taps, w, dim - 5, 1e-3, rng);
    const Link high = simulate(cfg, ch.taps, w, 2 * dim, 1e-3, rng);
    const auto e_low =
        subspace_estimate(batch_covariance(composite_blocks(low.received, cfg)), cfg, SubspaceOptions{false});
    const auto e_high = subspace_estimate(batch_covariance(composite_blocks(high.received, cfg)), cfg);
    below += nmse(oracle_align_scalar(e_low.response, ch.response).corrected, ch.response);
    above += nmse(oracle_align_scalar(e_high.response, ch.response).corrected, ch.response);
  }
  CHECK(above / below < 0.1);
}

TEST_CASE("precoding estimator is exact on model statistics") {
  for (SplitMode split : {SplitMode::None, SplitMode::Quadrant}) {
    const auto part = split_constellation(constellation_from_name("qam16"), split);
    const double sc2 = split == SplitMode::None ? 1.0 : part.centered_variance;
    const PrecoderXd w(32, 0.5);
    Rng rng(79);
    const CVectorXd resp = channel_freq_response(random_cvector(3, rng), 32);
    const double s2 = 1e-2;
    const auto cov = exact_frequency_covariance(resp, w, subcarrier_means(32, part), sc2, s2);
    const auto est = precoding_estimate(cov, w, s2, sc2);
    CHECK(est.ambiguity == Ambiguity::PhaseOnly);
    CHECK(std::abs(std::arg(est.response[0])) < 1e-12);
    CHECK((est.response.cwiseAbs() - resp.cwiseAbs()).norm() < 1e-8);
    CHECK(nmse(oracle_align_phase(est.response, resp).corrected, resp) < 1e-14);

    const VectorXd mags = estimate_bin_magnitudes(cov, w, subcarrier_means(32, part), s2, sc2);
    CHECK((mags - resp.cwiseAbs2()).norm() < 1e-10);
  }
  const PrecoderXd plain(32, 0.0);
  CovarianceXd dummy{10, CVectorXd::Zero(32), CMatrixXd::Identity(32, 32)};
  CHECK_THROWS_AS(precoding_estimate(dummy, plain, 0.0, 1.0), ConfigError);
}

TEST_CASE("bin power estimate clamps at zero") {
  const PrecoderXd w(8, 0.5);
  CovarianceXd cov{100, CVectorXd::Zero(8), 0.5 * CMatrixXd::Identity(8, 8)};
  const VectorXd mags = estimate_bin_magnitudes(cov, w, CVectorXd::Zero(8), 1.0, 1.0);
  CHECK(mags.norm() == 0.0);
}

TEST_CASE("precoding error decreases with the number of blocks") {
  const auto cfg = small_config(64, 2);
  const PrecoderXd w(64, 0.5);
  double prev = 1e9;
  for (int blocks : {25, 100, 400}) {
    double acc = 0.0;
    for (int t = 0; t < 40; ++t) {
      Rng rng(2000 + t);
      const auto ch = draw_channel({PdpKind::Exponential, 2}, 64, rng);
      const Link link = simulate(cfg, ch.taps, w, blocks, 1e-3, rng);
      const auto est =
          precoding_estimate(batch_covariance(received_stream_to_freq_blocks(link.received, cfg)), w, 1e-3, 1.0);
      acc += nmse(oracle_align_phase(est.response, ch.response).corrected, ch.response);
    }
    CHECK(acc < prev);
    prev = acc;
  }
}

TEST_CASE("oracle alignment finds the least-squares correction") {
  Rng rng(83);
  const CVectorXd truth = random_cvector(16, rng);
  const cd g(0.3, -1.7);
  const auto sa = oracle_align_scalar(g * truth, truth);
  CHECK(std::abs(sa.alpha - 1.0 / g) < 1e-12);
  CHECK((sa.corrected - truth).norm() < 1e-12);
  const auto pa = oracle_align_phase(std::polar(1.0, 1.1) * truth, truth);
  CHECK(pa.theta == doctest::Approx(-1.1));

  // Grid search over the phase as an independent check.
  const CVectorXd noisy = std::polar(1.0, 2.0) * truth + 0.3 * random_cvector(16, rng);
  const auto best = oracle_align_phase(noisy, truth);
  double grid_best = 1e9;
  for (int i = 0; i < 20000; ++i) {
    const double th = -kPi + 2 * kPi * i / 20000.0;
    grid_best = std::min(grid_best, (std::polar(1.0, th) * noisy - truth).squaredNorm());
  }
  CHECK((best.corrected - truth).squaredNorm() <= grid_best + 1e-12);
  CHECK_THROWS_AS(oracle_align_scalar(CVectorXd::Zero(4), truth.head(4)), EstimatorFailure);
}

TEST_CASE("noise variance from the composite covariance") {
  const auto cfg = small_config();
  Rng rng(89);
  const CVectorXd h = random_cvector(3, rng);
  const auto part = split_constellation(constellation_from_name("qam16"), SplitMode::None);
  const auto cov = exact_composite_covariance(h, cfg, PrecoderXd(16, 0.0), subcarrier_means(16, part), 1.0, 0.02);
  CHECK(noise_variance_from_composite(cov, cfg) == doctest::Approx(0.02).epsilon(1e-8));
}
