#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rssiloc/pathloss.hpp"

using namespace rssiloc;
namespace pl = rssiloc::pathloss;

namespace {
const PathLossParams<double> kIndoor{};  // d0 = 1 m, p0 = -33.44 dBm, eta = 3.567
}

TEST(PathLoss, MeanRssiAtTenMeters) { EXPECT_NEAR(pl::mean_rssi_dbm(10.0, kIndoor), -69.11, 1e-12); }

TEST(PathLoss, ReferenceDistanceGivesReferencePower) {
  EXPECT_DOUBLE_EQ(pl::mean_rssi_dbm(1.0, kIndoor), -33.44);
  EXPECT_DOUBLE_EQ(pl::invert_rssi_to_distance(-33.44, kIndoor), 1.0);
}

TEST(PathLoss, InversionOfKnownValue) { EXPECT_NEAR(pl::invert_rssi_to_distance(-69.11, kIndoor), 10.0, 1e-12); }

TEST(PathLoss, StrongerSignalMeansCloser) {
  EXPECT_LT(pl::invert_rssi_to_distance(-40.0, kIndoor), pl::invert_rssi_to_distance(-60.0, kIndoor));
}

TEST(PathLoss, RoundTripAcrossDecades) {
  for (double d = 0.1; d <= 1e4; d *= 1.37) {
    EXPECT_NEAR(pl::invert_rssi_to_distance(pl::mean_rssi_dbm(d, kIndoor), kIndoor), d, 1e-9 * d) << d;
  }
  const PathLossParams<double> other{2.5, -40.0, 2.0};
  for (double d = 0.1; d <= 1e4; d *= 3.1) {
    EXPECT_NEAR(pl::invert_rssi_to_distance(pl::mean_rssi_dbm(d, other), other), d, 1e-9 * d) << d;
  }
}

TEST(PathLoss, MeanRssiDecreasesWithDistance) {
  double prev = pl::mean_rssi_dbm(0.05, kIndoor);
  for (double d = 0.1; d < 100; d += 0.1) {
    const double p = pl::mean_rssi_dbm(d, kIndoor);
    EXPECT_LT(p, prev);
    prev = p;
  }
}

TEST(PathLoss, RejectsNonPositiveDistance) {
  EXPECT_THROW(pl::mean_rssi_dbm(0.0, kIndoor), DomainError);
  EXPECT_THROW(pl::mean_rssi_dbm(-1.0, kIndoor), DomainError);
}

TEST(PathLoss, ValidateParams) {
  EXPECT_THROW(pl::validate(PathLossParams<double>{1, -30, 0}), DomainError);
  EXPECT_THROW(pl::validate(PathLossParams<double>{0, -30, 3}), DomainError);
  EXPECT_NO_THROW(pl::validate(kIndoor));
}

TEST(DistanceSpread, KnownValue) {
  EXPECT_NEAR(pl::sigma_d(2.0, 3.567), 0.12910485522814946, 1e-15);
  EXPECT_EQ(pl::sigma_d(0.0, 3.567), 0.0);
  EXPECT_THROW(pl::sigma_d(-1.0, 3.567), DomainError);
}

TEST(DistanceSpread, VarianceAtTenMeters) {
  EXPECT_NEAR(pl::lognormal_distance_variance(10.0, pl::sigma_d(2.0, 3.567)), 1.7090251330492651, 1e-12);
  EXPECT_EQ(pl::lognormal_distance_variance(10.0, 0.0), 0.0);
}

TEST(DistanceSpread, VarianceIsMonotone) {
  const double sd = pl::sigma_d(3.0, 3.567);
  double prev = 0;
  for (double d = 0.5; d < 50; d += 0.5) {
    const double v = pl::lognormal_distance_variance(d, sd);
    EXPECT_GT(v, prev);
    prev = v;
  }
  prev = 0;
  for (double sp = 0.25; sp < 8; sp += 0.25) {
    const double v = pl::lognormal_distance_variance(10.0, pl::sigma_d(sp, 3.567));
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(DistanceSpread, TinySigmaKeepsPrecision) {
  // d^2 s^2 to leading order; a naive exp difference would lose every digit.
  const double s = 1e-9;
  EXPECT_NEAR(pl::lognormal_distance_variance(10.0, s), 100 * s * s, 1e-12 * 100 * s * s);
}

// Inverting a noisy RSSI gives d * exp(sigma_d n) with n standard normal:
// the log-distance is Gaussian and the sample variance about the median
// matches the closed form.
TEST(DistanceSpread, SampledInversionIsLogNormal) {
  const double d = 12.0, sigma_p = 3.0;
  const double sd = pl::sigma_d(sigma_p, kIndoor.eta);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, sigma_p);
  const int n = 400000;
  double sum_log = 0, sum_log2 = 0, sum_dev2 = 0;
  for (int i = 0; i < n; ++i) {
    const double dt = pl::invert_rssi_to_distance(pl::mean_rssi_dbm(d, kIndoor) + noise(rng), kIndoor);
    const double l = std::log(dt / d);
    sum_log += l;
    sum_log2 += l * l;
    sum_dev2 += (dt - d) * (dt - d);
  }
  const double mean_log = sum_log / n;
  EXPECT_NEAR(mean_log, 0.0, 5 * sd / std::sqrt(n));
  EXPECT_NEAR(std::sqrt(sum_log2 / n - mean_log * mean_log), sd, 0.01 * sd);
  // Second moment about the median, E[(d~ - d)^2] = d^2 (e^{2s^2} - 2 e^{s^2/2} + 1),
  // minus the squared bias, is the variance form above.
  const double s2 = sd * sd;
  const double bias = d * (std::exp(s2 / 2) - 1);
  const double var_sampled = sum_dev2 / n - bias * bias;
  EXPECT_NEAR(var_sampled, pl::lognormal_distance_variance(d, sd), 0.02 * pl::lognormal_distance_variance(d, sd));
}
