#pragma once

// Observation model, Fisher information and Cramer-Rao bound for
// self-localization with perturbed anchor positions.
//
// Unknowns theta = [x_b, y_b, x_1, y_1, ..., x_M, y_M]; the true anchor
// positions are nuisance parameters. Observations per anchor are the RSSI
// p_i (dBm, Gaussian about the path-loss mean) and the reported position
// (Gaussian about the true one). With
//   b_i = (10 eta / (sigma_p_i ln 10))^2,   L_i = ln(d_i^2 / d~_i^2)
// the RSSI log-density is -ln(sqrt(2 pi) sigma_p_i) - (b_i / 8) L_i^2.
//
// The FIM is assembled from closed forms. hessian_analytic() is kept to
// check those forms against the likelihood, not to build the FIM.

#include <cmath>
#include <numbers>
#include <vector>

#include "rssiloc/errors.hpp"
#include "rssiloc/pathloss.hpp"
#include "rssiloc/types.hpp"

namespace rssiloc::crlb {

template <typename Scalar>
struct ParameterVector {
  Point<Scalar> blind;
  std::vector<Point<Scalar>> anchors;  // true anchor positions

  std::size_t size() const { return 2 + 2 * anchors.size(); }
};

template <typename Scalar>
struct ObservationVector {
  std::vector<Scalar> rssi_dbm;
  std::vector<Point<Scalar>> reported;
};

template <typename Scalar>
struct NoiseSpec {
  std::vector<Scalar> sigma_a;  // m, per anchor
  std::vector<Scalar> sigma_p;  // dB, per anchor
  PathLossParams<Scalar> params{};
};

/// Partition of the FIM into blind (F11), cross (F12) and anchor (F22) blocks.
/// F22 is block diagonal and stored as its 2x2 blocks.
template <typename Scalar>
struct FimBlocks {
  Matrix2<Scalar> f11;
  Eigen::Matrix<Scalar, 2, Eigen::Dynamic> f12;
  std::vector<Matrix2<Scalar>> f22_blocks;

  MatrixX<Scalar> f22() const {
    const auto m = static_cast<Eigen::Index>(f22_blocks.size());
    MatrixX<Scalar> out = MatrixX<Scalar>::Zero(2 * m, 2 * m);
    for (Eigen::Index i = 0; i < m; ++i) out.template block<2, 2>(2 * i, 2 * i) = f22_blocks[i];
    return out;
  }

  MatrixX<Scalar> assemble() const {
    const auto n = 2 + f12.cols();
    MatrixX<Scalar> out(n, n);
    out.template topLeftCorner<2, 2>() = f11;
    out.topRightCorner(2, n - 2) = f12;
    out.bottomLeftCorner(n - 2, 2) = f12.transpose();
    out.bottomRightCorner(n - 2, n - 2) = f22();
    return out;
  }
};

/// b = (10 eta / (sigma_p ln 10))^2, the RSSI information scale.
template <typename Scalar>
Scalar b_coefficient(Scalar sigma_p, Scalar eta) {
  if (!(sigma_p > 0)) throw DomainError("crlb: sigma_p must be > 0");
  const Scalar r = Scalar(10) * eta / (sigma_p * std::numbers::ln10_v<Scalar>);
  return r * r;
}

namespace detail {

template <typename Scalar>
void check_noise(std::size_t m, const NoiseSpec<Scalar>& noise) {
  if (m == 0) throw DomainError("crlb: need at least one anchor");
  if (noise.sigma_a.size() != m || noise.sigma_p.size() != m) {
    throw DomainError("crlb: noise spec length does not match anchor count");
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (!(noise.sigma_a[i] > 0)) throw DomainError("crlb: sigma_a must be > 0 (anchor " + std::to_string(i) + ")");
    if (!(noise.sigma_p[i] > 0)) throw DomainError("crlb: sigma_p must be > 0 (anchor " + std::to_string(i) + ")");
  }
  pathloss::validate(noise.params);
}

template <typename Scalar>
void check_observations(const ParameterVector<Scalar>& theta, const ObservationVector<Scalar>& obs) {
  const auto m = theta.anchors.size();
  if (obs.rssi_dbm.size() != m || obs.reported.size() != m) {
    throw DomainError("crlb: observation length does not match anchor count");
  }
}

// Offsets of anchor i from the blind node and its squared distance.
template <typename Scalar>
struct Geometry {
  Scalar u, v, d2;
};

template <typename Scalar>
Geometry<Scalar> geometry(const ParameterVector<Scalar>& theta, std::size_t i) {
  const Scalar u = theta.anchors[i].x() - theta.blind.x();
  const Scalar v = theta.anchors[i].y() - theta.blind.y();
  const Scalar d2 = u * u + v * v;
  if (!(d2 > 0)) throw DomainError("crlb: blind node coincides with anchor " + std::to_string(i));
  return {u, v, d2};
}

template <typename Scalar>
Matrix2<Scalar> outer(const Geometry<Scalar>& g) {
  Matrix2<Scalar> q;
  q << g.u * g.u, g.u * g.v, g.u * g.v, g.v * g.v;
  return q;
}

// Closed-form inverse of a 2x2 matrix with a determinant guard.
template <typename Scalar>
Matrix2<Scalar> inverse2(const Matrix2<Scalar>& a) {
  const Scalar det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  const Scalar scale = a.cwiseAbs().maxCoeff();
  if (!(std::abs(det) > std::numeric_limits<Scalar>::epsilon() * scale * scale)) {
    throw SingularGeometryError("crlb: singular 2x2 block");
  }
  Matrix2<Scalar> inv;
  inv << a(1, 1), -a(0, 1), -a(1, 0), a(0, 0);
  return inv / det;
}

}  // namespace detail

/// Log-likelihood l(theta | x).
template <typename Scalar>
Scalar log_likelihood(const ParameterVector<Scalar>& theta, const ObservationVector<Scalar>& obs,
                      const NoiseSpec<Scalar>& noise) {
  const auto m = theta.anchors.size();
  detail::check_noise(m, noise);
  detail::check_observations(theta, obs);
  const Scalar half_log_2pi = Scalar(0.5) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>);

  Scalar l = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto g = detail::geometry(theta, i);
    const Scalar b = b_coefficient(noise.sigma_p[i], noise.params.eta);
    const Scalar d_tilde = pathloss::invert_rssi_to_distance(obs.rssi_dbm[i], noise.params);
    const Scalar log_ratio = std::log(g.d2 / (d_tilde * d_tilde));
    l += -half_log_2pi - std::log(noise.sigma_p[i]) - b / Scalar(8) * log_ratio * log_ratio;

    const Scalar sa = noise.sigma_a[i];
    const Point<Scalar> r = obs.reported[i] - theta.anchors[i];
    l += Scalar(2) * (-half_log_2pi - std::log(sa)) - r.squaredNorm() / (Scalar(2) * sa * sa);
  }
  return l;
}

/// Hessian of log_likelihood with respect to theta, from closed-form second
/// partials. Anchor-anchor blocks for different anchors are zero.
template <typename Scalar>
MatrixX<Scalar> hessian_analytic(const ParameterVector<Scalar>& theta, const ObservationVector<Scalar>& obs,
                                 const NoiseSpec<Scalar>& noise) {
  const auto m = theta.anchors.size();
  detail::check_noise(m, noise);
  detail::check_observations(theta, obs);

  const auto n = static_cast<Eigen::Index>(theta.size());
  MatrixX<Scalar> h = MatrixX<Scalar>::Zero(n, n);
  for (std::size_t i = 0; i < m; ++i) {
    const auto [u, v, d2] = detail::geometry(theta, i);
    const Scalar d4 = d2 * d2;
    const Scalar b = b_coefficient(noise.sigma_p[i], noise.params.eta);
    const Scalar d_tilde = pathloss::invert_rssi_to_distance(obs.rssi_dbm[i], noise.params);
    const Scalar L = std::log(d2 / (d_tilde * d_tilde));
    const Scalar inv_sa2 = Scalar(1) / (noise.sigma_a[i] * noise.sigma_a[i]);

    // Second partials of the i-th RSSI term w.r.t. (x_b, y_b).
    const Scalar hxx = -b * u * u / d4 + b * L * (u * u / d4 - Scalar(1) / (Scalar(2) * d2));
    const Scalar hyy = -b * v * v / d4 + b * L * (v * v / d4 - Scalar(1) / (Scalar(2) * d2));
    const Scalar hxy = b * u * v / d4 * (L - Scalar(1));

    const Eigen::Index xi = 2 + 2 * static_cast<Eigen::Index>(i);
    const Eigen::Index yi = xi + 1;

    h(0, 0) += hxx;
    h(1, 1) += hyy;
    h(0, 1) += hxy;

    // Blind-anchor cross terms flip sign: the term depends on x_i - x_b.
    h(0, xi) = -hxx;
    h(0, yi) = -hxy;
    h(1, xi) = -hxy;
    h(1, yi) = -hyy;

    h(xi, xi) = hxx - inv_sa2;
    h(yi, yi) = hyy - inv_sa2;
    h(xi, yi) = hxy;
  }
  // Mirror the upper triangle.
  h.template triangularView<Eigen::StrictlyLower>() = h.transpose();
  return h;
}

/// Fisher information blocks at theta.
template <typename Scalar>
FimBlocks<Scalar> fim(const ParameterVector<Scalar>& theta, const NoiseSpec<Scalar>& noise) {
  const auto m = theta.anchors.size();
  detail::check_noise(m, noise);

  FimBlocks<Scalar> out;
  out.f11.setZero();
  out.f12.resize(2, 2 * static_cast<Eigen::Index>(m));
  out.f22_blocks.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto g = detail::geometry(theta, i);
    const Scalar b = b_coefficient(noise.sigma_p[i], noise.params.eta);
    const Matrix2<Scalar> info = b / (g.d2 * g.d2) * detail::outer(g);
    const Scalar inv_sa2 = Scalar(1) / (noise.sigma_a[i] * noise.sigma_a[i]);
    out.f11 += info;
    out.f12.template block<2, 2>(0, 2 * static_cast<Eigen::Index>(i)) = -info;
    out.f22_blocks.push_back(info + inv_sa2 * Matrix2<Scalar>::Identity());
  }
  return out;
}

/// Equivalent information on the blind position after marginalising the
/// anchors: F11 - F12 F22^{-1} F12^T, with F22 inverted block by block.
template <typename Scalar>
Matrix2<Scalar> schur_complement(const FimBlocks<Scalar>& blocks) {
  Matrix2<Scalar> s = blocks.f11;
  for (std::size_t i = 0; i < blocks.f22_blocks.size(); ++i) {
    const Matrix2<Scalar> c = blocks.f12.template block<2, 2>(0, 2 * static_cast<Eigen::Index>(i));
    s -= c * detail::inverse2(blocks.f22_blocks[i]) * c.transpose();
  }
  return s;
}

/// Maximum condition number accepted for the Schur complement.
inline constexpr double kMaxCondition = 1e12;

/// sqrt(Tr{(F11 - F12 F22^{-1} F12^T)^{-1}}), the RMSE floor in meters.
template <typename Scalar>
Scalar crlb_rmse_bound(const FimBlocks<Scalar>& blocks) {
  Matrix2<Scalar> s = schur_complement(blocks);
  s = Scalar(0.5) * (s + s.transpose());
  const Scalar tr = s.trace();
  const Scalar det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
  // Eigenvalues of a symmetric 2x2.
  const Scalar half_gap = std::sqrt(std::max(Scalar(0), tr * tr / Scalar(4) - det));
  const Scalar lmax = tr / Scalar(2) + half_gap;
  const Scalar lmin = tr / Scalar(2) - half_gap;
  if (!(lmin > 0) || lmax / lmin > Scalar(kMaxCondition)) {
    throw SingularGeometryError("crlb: Schur complement is singular (degenerate geometry)");
  }
  // Tr(S^{-1}) = Tr(S) / det(S) for 2x2.
  return std::sqrt(tr / (lmax * lmin));
}

template <typename Scalar>
Scalar crlb_rmse_bound(const ParameterVector<Scalar>& theta, const NoiseSpec<Scalar>& noise) {
  return crlb_rmse_bound(fim(theta, noise));
}

}  // namespace rssiloc::crlb
