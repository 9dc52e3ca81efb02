#pragma once

#include <Eigen/Core>

namespace rssiloc {

/// 2-D Cartesian position in meters.
template <typename Scalar>
using Point = Eigen::Matrix<Scalar, 2, 1>;

template <typename Scalar>
using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Point2d = Point<double>;

/// Parameters of the log-distance shadowing model.
template <typename Scalar>
struct PathLossParams {
  Scalar d0{1};         // reference distance, m
  Scalar p0_dbm{-33.44};  // received power at d0, dBm
  Scalar eta{3.567};    // path-loss exponent

  bool operator==(const PathLossParams&) const = default;
};

/// What the blind node sees from one anchor.
template <typename Scalar>
struct AnchorReading {
  Point<Scalar> pos;   // reported (perturbed) anchor position
  Scalar sigma_a{0};   // std-dev of the position report per axis, m
  Scalar rssi_dbm{0};  // measured RSSI
  Scalar sigma_p{0};   // std-dev of the RSSI measurement, dB
};

}  // namespace rssiloc
