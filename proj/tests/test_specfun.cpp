#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rssiloc/specfun.hpp"

using namespace rssiloc;
namespace sf = rssiloc::specfun;

namespace {

// (1/pi) int_0^pi exp(x (cos t - 1)) cos(n t) dt = exp(-x) I_n(x), x >= 0.
// Trapezoid on a periodic integrand converges geometrically.
double scaled_bessel_quadrature(int n, double x, int panels = 4000) {
  const double h = std::numbers::pi / panels;
  double sum = 0;
  for (int k = 0; k <= panels; ++k) {
    const double t = k * h;
    const double f = std::exp(x * (std::cos(t) - 1.0)) * std::cos(n * t);
    sum += (k == 0 || k == panels) ? 0.5 * f : f;
  }
  return sum * h / std::numbers::pi;
}

double naive_laguerre(double z) {
  const double t = -z / 2;
  return std::exp(z / 2) * ((1 - z) * std::cyl_bessel_i(0.0, t) + (-z) * std::cyl_bessel_i(1.0, t));
}

// 1F1(-1/2; 1; z) through Kummer's transformation e^z 1F1(3/2; 1; -z), whose
// series has positive terms for z < 0.
double kummer_laguerre(double z) {
  long double term = 1, sum = 1;
  for (int k = 0; k < 2000 && term > 1e-21L * sum; ++k) {
    term *= (1.5L + k) / ((k + 1.0L) * (k + 1.0L)) * -z;
    sum += term;
  }
  return static_cast<double>(std::exp(static_cast<long double>(z)) * sum);
}

// Long double reference for the Rice variance via unscaled Bessel values.
long double rice_variance_ld(long double delta, long double sigma) {
  const long double a = delta * delta / (2 * sigma * sigma);
  const long double t = a / 2;
  const long double L = std::exp(-t) * ((1 + a) * std::cyl_bessel_il(0.0L, t) + a * std::cyl_bessel_il(1.0L, t));
  return delta * delta + 2 * sigma * sigma - std::numbers::pi_v<long double> * sigma * sigma / 2 * L * L;
}

double sampled_rice_variance(double delta, double sigma, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  double mean = 0, m2 = 0;
  for (int i = 1; i <= n; ++i) {
    const double r = std::hypot(delta + sigma * g(rng), sigma * g(rng));
    const double d = r - mean;
    mean += d / i;
    m2 += d * (r - mean);
  }
  return m2 / (n - 1);
}

}  // namespace

TEST(Bessel, KnownValuesAtOne) {
  EXPECT_NEAR(sf::bessel_i0(1.0), 1.2660658777520083, 1e-15);
  EXPECT_NEAR(sf::bessel_i1(1.0), 0.5651591039924850, 1e-15);
  EXPECT_DOUBLE_EQ(sf::bessel_i0(0.0), 1.0);
  EXPECT_DOUBLE_EQ(sf::bessel_i1(0.0), 0.0);
}

TEST(Bessel, ScaledMatchesQuadrature) {
  for (double x : {0.01, 0.5, 3.0, 12.0, 19.99, 20.01, 35.0, 120.0, 700.0, 5000.0}) {
    // The cos(t) weight cancels near zero, so the quadrature itself is only
    // good to ~1e-15 absolute there.
    const double q0 = scaled_bessel_quadrature(0, x), q1 = scaled_bessel_quadrature(1, x);
    EXPECT_NEAR(sf::bessel_i0e(x), q0, 1e-13 * q0 + 1e-14) << x;
    EXPECT_NEAR(sf::bessel_i1e(x), q1, 1e-13 * q1 + 1e-14) << x;
  }
}

TEST(Bessel, UnscaledMatchesStdlib) {
  for (double x : {0.2, 4.0, 19.0, 21.0, 80.0, 400.0, 700.0}) {
    EXPECT_NEAR(sf::bessel_i0(x) / std::cyl_bessel_i(0.0, x), 1.0, 1e-13) << x;
    EXPECT_NEAR(sf::bessel_i1(x) / std::cyl_bessel_i(1.0, x), 1.0, 1e-13) << x;
  }
}

TEST(Bessel, Parity) {
  for (double x : {0.3, 7.0, 25.0, 300.0}) {
    EXPECT_EQ(sf::bessel_i0(-x), sf::bessel_i0(x));
    EXPECT_EQ(sf::bessel_i1(-x), -sf::bessel_i1(x));
    EXPECT_EQ(sf::bessel_i1e(-x), -sf::bessel_i1e(x));
  }
}

TEST(Bessel, SaturatesInsteadOfOverflowing) {
  EXPECT_NO_THROW(sf::bessel_i0(700.0));
  EXPECT_THROW(sf::bessel_i0(800.0), SaturationError);
  EXPECT_THROW(sf::bessel_i1(-800.0), SaturationError);
  EXPECT_TRUE(std::isfinite(sf::bessel_i0e(1e6)));
}

TEST(Laguerre, RayleighIdentity) { EXPECT_EQ(sf::laguerre_half(0.0), 1.0); }

TEST(Laguerre, KnownValue) { EXPECT_NEAR(sf::laguerre_half(-1.0), 1.4464913440831718, 1e-14); }

TEST(Laguerre, MatchesHypergeometric) {
  // L_{1/2}(z) = 1F1(-1/2; 1; z)
  for (double z : {-0.1, -1.0, -5.0, -12.0, -25.0}) {
    EXPECT_NEAR(sf::laguerre_half(z), kummer_laguerre(z), 1e-12 * kummer_laguerre(z)) << z;
  }
}

TEST(Laguerre, ScaledAgreesWithNaiveForm) {
  for (double z = 0.0; z >= -20.0; z -= 0.25) {
    EXPECT_NEAR(sf::laguerre_half(z), naive_laguerre(z), 1e-12 * naive_laguerre(z)) << z;
  }
}

TEST(Laguerre, FiniteFarIntoTheTail) {
  const double v = sf::laguerre_half(-650.0);
  EXPECT_TRUE(std::isfinite(v));
  // Leading behaviour 2 sqrt(|z| / pi) (1 + 1 / (4 |z|)).
  EXPECT_NEAR(v, 2 * std::sqrt(650.0 / std::numbers::pi) * (1 + 1 / 2600.0), 1e-5 * v);
  EXPECT_NEAR(sf::laguerre_half(-50.0), 8.0188411168839107, 1e-13);
}

TEST(Laguerre, RejectsPositiveArgument) { EXPECT_THROW(sf::laguerre_half(0.5), DomainError); }

TEST(RiceVariance, ReferenceValues) {
  EXPECT_NEAR(sf::rice_variance(0.0, 1.0), 2 - std::numbers::pi / 2, 1e-15);
  EXPECT_NEAR(sf::rice_variance(1.0, 1.0), 0.60192333442257128, 1e-14);
  EXPECT_NEAR(sf::rice_variance(3.0, 2.0), 2.9384637424032049, 1e-13);
  EXPECT_NEAR(sf::rice_variance(10.0, 1.0), 0.99494855667091594, 1e-12);
  EXPECT_NEAR(sf::rice_variance(50.0, 1.0), 0.99979991991183637, 1e-12);
  EXPECT_NEAR(sf::rice_variance(100.0, 1.0), 0.99994999499862436, 1e-12);
}

TEST(RiceVariance, ZeroSigmaIsZero) {
  EXPECT_EQ(sf::rice_variance(0.0, 0.0), 0.0);
  EXPECT_EQ(sf::rice_variance(12.5, 0.0), 0.0);
}

TEST(RiceVariance, AsymptoticBranchMatchesExtendedPrecision) {
  for (double ratio : {8.0, 8.95, 9.0, 12.0, 30.0, 60.0}) {
    for (double sigma : {0.5, 1.0, 6.0}) {
      const double delta = ratio * sigma;
      const double ref = static_cast<double>(rice_variance_ld(delta, sigma));
      EXPECT_NEAR(sf::rice_variance(delta, sigma), ref, 1e-9 * ref) << ratio << " " << sigma;
    }
  }
}

TEST(RiceVariance, ContinuousAcrossBranchSwitch) {
  const double sigma = 2.0;
  const double delta = std::sqrt(2 * 40.0) * sigma;
  const double lo = sf::rice_variance(std::nextafter(delta, 0.0), sigma);
  const double hi = sf::rice_variance(std::nextafter(delta, 1e9), sigma);
  EXPECT_NEAR(lo, hi, 1e-12 * lo);
}

TEST(RiceVariance, LimitsAndMonotonicity) {
  EXPECT_NEAR(sf::rice_variance(1e4, 1.0), 1.0, 1e-7);
  EXPECT_NEAR(sf::rice_variance(35.0, 1e-3), 1e-6, 1e-12);
  // Grows with sigma at fixed delta, and with delta at fixed sigma.
  double prev = 0;
  for (double s = 0.1; s < 10; s += 0.1) {
    const double v = sf::rice_variance(7.0, s);
    EXPECT_GT(v, prev);
    prev = v;
  }
  prev = 0;
  for (double d = 0.0; d < 40; d += 0.5) {
    const double v = sf::rice_variance(d, 1.0);
    EXPECT_GT(v, prev);
    EXPECT_LE(v, 1.0);
    prev = v;
  }
}

TEST(RiceVariance, MatchesSampling) {
  for (double ratio : {0.0, 1.0, 10.0}) {
    const double sigma = 2.0;
    const double ref = sampled_rice_variance(ratio * sigma, sigma, 400000, 17);
    EXPECT_NEAR(sf::rice_variance(ratio * sigma, sigma), ref, 0.02 * ref) << ratio;
  }
}

TEST(RiceVariance, FloatInstantiation) {
  EXPECT_NEAR(sf::rice_variance(1.0f, 1.0f), 0.6019233f, 1e-5f);
  EXPECT_NEAR(sf::rice_variance(300.0f, 1.0f), 1.0f, 1e-3f);
}

TEST(RiceVariance, RejectsNegativeArguments) {
  EXPECT_THROW(sf::rice_variance(-1.0, 1.0), DomainError);
  EXPECT_THROW(sf::rice_variance(1.0, -1.0), DomainError);
}
