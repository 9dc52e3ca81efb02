#pragma once

// Log-distance shadowing model, all in dBm:
//   p(d) = p0 - 10 eta log10(d / d0) + n,  n ~ N(0, sigma_p^2).

#include <cmath>
#include <numbers>

#include "rssiloc/errors.hpp"
#include "rssiloc/types.hpp"

namespace rssiloc::pathloss {

template <typename Scalar>
void validate(const PathLossParams<Scalar>& params) {
  if (!(params.d0 > 0)) throw DomainError("pathloss: d0 must be > 0");
  if (!(params.eta > 0)) throw DomainError("pathloss: eta must be > 0");
}

/// Mean received power at distance d.
template <typename Scalar>
Scalar mean_rssi_dbm(Scalar d, const PathLossParams<Scalar>& params) {
  if (!(d > 0)) throw DomainError("mean_rssi_dbm: distance must be > 0");
  return params.p0_dbm - Scalar(10) * params.eta * std::log10(d / params.d0);
}

/// Distance at which the mean path-loss curve yields p_dbm. Stronger signal
/// gives a shorter distance.
template <typename Scalar>
Scalar invert_rssi_to_distance(Scalar p_dbm, const PathLossParams<Scalar>& params) {
  return params.d0 * std::pow(Scalar(10), (params.p0_dbm - p_dbm) / (Scalar(10) * params.eta));
}

/// Natural-log spread of the RSSI-induced distance: (ln 10 / (10 eta)) sigma_p.
template <typename Scalar>
Scalar sigma_d(Scalar sigma_p, Scalar eta) {
  if (sigma_p < 0 || !(eta > 0)) throw DomainError("sigma_d: requires sigma_p >= 0 and eta > 0");
  return std::numbers::ln10_v<Scalar> / (Scalar(10) * eta) * sigma_p;
}

/// Variance of d * exp(sigma_d n) about its median d: d^2 (e^{2 s^2} - e^{s^2}).
template <typename Scalar>
Scalar lognormal_distance_variance(Scalar d, Scalar sigma_d) {
  if (d < 0 || sigma_d < 0) throw DomainError("lognormal_distance_variance: requires d >= 0 and sigma_d >= 0");
  const Scalar s2 = sigma_d * sigma_d;
  // e^{2s2} - e^{s2} = e^{s2} (e^{s2} - 1); expm1 keeps small sigma accurate.
  return d * d * std::exp(s2) * std::expm1(s2);
}

}  // namespace rssiloc::pathloss
