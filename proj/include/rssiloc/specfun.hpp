#pragma once

// Modified Bessel functions I0/I1, the Laguerre function L_{1/2} and the
// variance of a Rice-distributed distance.
//
// The Rice weight needs L_{1/2}(z) for z as low as -(35 m)^2 / (2 (1 m)^2),
// where exp(z/2) underflows and I0(-z/2) overflows. Everything below is
// therefore built on the exponentially scaled functions
//   i0e(x) = exp(-|x|) I0(x),   i1e(x) = exp(-|x|) I1(x).

#include <cmath>
#include <limits>
#include <numbers>

#include "rssiloc/errors.hpp"

namespace rssiloc::specfun {

namespace detail {

// Power series and the large-argument expansion agree to machine precision
// for double at this switch point: the smallest asymptotic term is about
// exp(-2x).
template <typename Scalar>
inline constexpr Scalar kSeriesLimit = Scalar(20);

template <typename Scalar>
Scalar eps() {
  return std::numeric_limits<Scalar>::epsilon();
}

// sum_k (x^2/4)^k / (k! (k+order)!) * (x/2)^order for order 0 or 1.
// All terms are positive, so there is no cancellation.
template <typename Scalar>
Scalar bessel_series(int order, Scalar x) {
  const Scalar q = x * x / Scalar(4);
  Scalar term = order == 0 ? Scalar(1) : x / Scalar(2);
  Scalar sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= q / (Scalar(k) * Scalar(k + order));
    sum += term;
    if (std::abs(term) <= eps<Scalar>() * std::abs(sum) * Scalar(0.25)) break;
  }
  return sum;
}

// Hankel expansion of exp(-x) I_nu(x), x > 0:
//   1/sqrt(2 pi x) * sum_k (-1)^k prod_{j<=k} (mu - (2j-1)^2) / (k! (8x)^k)
template <typename Scalar>
Scalar bessel_scaled_asymptotic(int order, Scalar x) {
  const Scalar mu = Scalar(4 * order * order);
  Scalar term = 1;
  Scalar sum = 1;
  Scalar prev = std::numeric_limits<Scalar>::infinity();
  for (int k = 1; k < 200; ++k) {
    const Scalar odd = Scalar(2 * k - 1);
    term *= -(mu - odd * odd) / (Scalar(k) * Scalar(8) * x);
    if (std::abs(term) >= prev) break;  // divergent tail
    sum += term;
    prev = std::abs(term);
    if (prev <= eps<Scalar>() * std::abs(sum) * Scalar(0.25)) break;
  }
  return sum / std::sqrt(Scalar(2) * std::numbers::pi_v<Scalar> * x);
}

}  // namespace detail

/// exp(-|x|) I0(x). Finite for every finite x.
template <typename Scalar>
Scalar bessel_i0e(Scalar x) {
  const Scalar ax = std::abs(x);
  if (ax <= detail::kSeriesLimit<Scalar>) {
    return detail::bessel_series(0, ax) * std::exp(-ax);
  }
  return detail::bessel_scaled_asymptotic(0, ax);
}

/// exp(-|x|) I1(x). Odd in x.
template <typename Scalar>
Scalar bessel_i1e(Scalar x) {
  const Scalar ax = std::abs(x);
  Scalar r;
  if (ax <= detail::kSeriesLimit<Scalar>) {
    r = detail::bessel_series(1, ax) * std::exp(-ax);
  } else {
    r = detail::bessel_scaled_asymptotic(1, ax);
  }
  return x < 0 ? -r : r;
}

namespace detail {

template <typename Scalar>
Scalar unscale(Scalar scaled, Scalar x, const char* name) {
  const Scalar ax = std::abs(x);
  if (!std::isfinite(x)) throw DomainError(std::string(name) + ": non-finite argument");
  if (ax <= kSeriesLimit<Scalar>) return scaled * std::exp(ax);
  // exp(ax) alone may overflow while the product would not; go through logs.
  const Scalar log_mag = ax + std::log(std::abs(scaled));
  if (log_mag >= std::log(std::numeric_limits<Scalar>::max())) {
    throw SaturationError(std::string(name) + ": result overflows for |x| = " +
                          std::to_string(static_cast<double>(ax)));
  }
  return scaled * std::exp(ax);
}

}  // namespace detail

/// Modified Bessel function of the first kind, order zero.
/// Throws SaturationError when the result exceeds the scalar range.
template <typename Scalar>
Scalar bessel_i0(Scalar x) {
  if (std::abs(x) <= detail::kSeriesLimit<Scalar>) return detail::bessel_series(0, std::abs(x));
  return detail::unscale(bessel_i0e(x), x, "bessel_i0");
}

/// Modified Bessel function of the first kind, order one.
template <typename Scalar>
Scalar bessel_i1(Scalar x) {
  if (std::abs(x) <= detail::kSeriesLimit<Scalar>) {
    const Scalar r = detail::bessel_series(1, std::abs(x));
    return x < 0 ? -r : r;
  }
  return detail::unscale(bessel_i1e(x), x, "bessel_i1");
}

/// L_{1/2}(z) = exp(z/2) [(1 - z) I0(-z/2) - z I1(-z/2)] for z <= 0.
///
/// With t = -z/2 >= 0 this is (1 + 2t) i0e(t) + 2t i1e(t), which stays
/// finite for any z.
template <typename Scalar>
Scalar laguerre_half(Scalar z) {
  if (!(z <= Scalar(0))) throw DomainError("laguerre_half: requires z <= 0");
  const Scalar t = -z / Scalar(2);
  return (Scalar(1) + Scalar(2) * t) * bessel_i0e(t) + Scalar(2) * t * bessel_i1e(t);
}

/// Variance of |p| where p ~ N(mu, sigma_a^2 I_2) and |mu| = delta:
///   delta^2 + 2 sigma_a^2 - (pi sigma_a^2 / 2) L_{1/2}^2(-delta^2 / (2 sigma_a^2)).
template <typename Scalar>
Scalar rice_variance(Scalar delta, Scalar sigma_a) {
  if (delta < 0 || sigma_a < 0) throw DomainError("rice_variance: requires delta >= 0 and sigma_a >= 0");
  if (sigma_a == Scalar(0)) return Scalar(0);

  const Scalar s2 = sigma_a * sigma_a;
  const Scalar a = delta * delta / (Scalar(2) * s2);  // -z

  if (a <= Scalar(2) * detail::kSeriesLimit<Scalar>) {
    const Scalar L = laguerre_half(-a);
    const Scalar var = Scalar(2) * s2 * (a + Scalar(1)) - std::numbers::pi_v<Scalar> * s2 / Scalar(2) * L * L;
    return var > Scalar(0) ? var : Scalar(0);
  }

  // Large delta/sigma_a: delta^2 and the Laguerre term nearly cancel. Write
  // (pi/2) L^2 = P^2 / (2a) with P = (1 + a) S0 + a S1, where S0, S1 are the
  // Hankel sums of i0e, i1e at t = a/2. Splitting P = 2a + R with
  //   R = S0 + a (S0 + S1 - 2)
  // leaves var / sigma_a^2 = 2 - 2R - R^2 / (2a), free of cancellation.
  const Scalar t = a / Scalar(2);
  Scalar term0 = 1, term1 = 1;
  Scalar s0_tail = 0;      // S0 - 1
  Scalar s01_tail = 0;     // S0 + S1 - 2
  for (int k = 1; k < 200; ++k) {
    const Scalar odd = Scalar(2 * k - 1);
    const Scalar next0 = term0 * (odd * odd) / (Scalar(k) * Scalar(8) * t);
    const Scalar next1 = term1 * -(Scalar(4) - odd * odd) / (Scalar(k) * Scalar(8) * t);
    if (std::abs(next0) >= std::abs(term0) && k > 1) break;
    term0 = next0;
    term1 = next1;
    s0_tail += term0;
    s01_tail += term0 + term1;
    if (a * (std::abs(term0) + std::abs(term1)) <= detail::eps<Scalar>() * Scalar(0.25)) break;
  }
  const Scalar R = Scalar(1) + s0_tail + a * s01_tail;
  const Scalar var = s2 * (Scalar(2) - Scalar(2) * R - R * R / (Scalar(2) * a));
  return var > Scalar(0) ? var : Scalar(0);
}

}  // namespace rssiloc::specfun
