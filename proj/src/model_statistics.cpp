#include "ofdmblind/model_statistics.hpp"

#include "ofdmblind/estimators.hpp"

namespace ofdmblind {

CovarianceXd exact_composite_covariance(const CVectorXd& taps, const OfdmConfig& cfg, const PrecoderXd& precoder,
                                        const CVectorXd& symbol_mean, double sigma_c2, double sigma_n2) {
  const Eigen::Index n = cfg.n_subcarriers;
  const CMatrixXd conv = build_conv_matrix(taps, cfg);

  // Body covariance sigma_c2 U U^H with U = F^H W.
  const CMatrixXd w = precoder.dense().cast<cd>();
  CMatrixXd u(n, n);
  for (Eigen::Index j = 0; j < n; ++j) u.col(j) = unitary_idft(w.col(j));
  CMatrixXd pair = CMatrixXd::Zero(2 * n, 2 * n);
  pair.topLeftCorner(n, n) = sigma_c2 * u * u.adjoint();
  pair.bottomRightCorner(n, n) = pair.topLeftCorner(n, n);

  const CVectorXd body_mean = unitary_idft(precoder.apply(symbol_mean).col(0));
  CVectorXd pair_mean(2 * n);
  pair_mean << body_mean, body_mean;

  CovarianceXd est;
  est.count = CovarianceXd::kExact;
  est.mean = conv * pair_mean;
  est.cov = conv * pair * conv.adjoint();
  est.cov.diagonal().array() += sigma_n2;
  return est;
}

CovarianceXd exact_frequency_covariance(const CVectorXd& response, const PrecoderXd& precoder,
                                        const CVectorXd& symbol_mean, double sigma_c2, double sigma_n2) {
  const CMatrixXd corr = precoder.correlation().cast<cd>();
  CovarianceXd est;
  est.count = CovarianceXd::kExact;
  est.mean = response.cwiseProduct(precoder.apply(symbol_mean).col(0));
  est.cov = sigma_c2 * response.asDiagonal() * corr * response.conjugate().asDiagonal();
  est.cov.diagonal().array() += sigma_n2;
  return est;
}

}  // namespace ofdmblind
