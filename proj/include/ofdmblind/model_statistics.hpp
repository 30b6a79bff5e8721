#pragma once

#include "ofdmblind/covariance.hpp"
#include "ofdmblind/ofdm.hpp"
#include "ofdmblind/precoder.hpp"

namespace ofdmblind {

// Second-order statistics implied by the signal model, i.e. the M -> infinity
// limit of the sample estimates. Symbols are independent with per-subcarrier
// mean `symbol_mean` and centered variance `sigma_c2`.

/// Composite-block statistics: mean H(h) [u; u] and covariance
/// H(h) blkdiag(R, R) H(h)^H + sigma_n2 I with R = sigma_c2 F^H P F.
CovarianceXd exact_composite_covariance(const CVectorXd& taps, const OfdmConfig& cfg, const PrecoderXd& precoder,
                                        const CVectorXd& symbol_mean, double sigma_c2, double sigma_n2);

/// Frequency-block statistics: mean H o (W mu) and covariance
/// sigma_c2 diag(H) P diag(H)^H + sigma_n2 I.
CovarianceXd exact_frequency_covariance(const CVectorXd& response, const PrecoderXd& precoder,
                                        const CVectorXd& symbol_mean, double sigma_c2, double sigma_n2);

}  // namespace ofdmblind
