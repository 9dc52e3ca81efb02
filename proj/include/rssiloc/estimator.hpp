#pragma once

// Weighted least-squares self-localization by gradient descent.
//
// Both estimators minimise sum_i (delta_i - d_i)^2 / w_i, where delta_i is the
// distance from the iterate to the reported position of anchor i and d_i the
// RSSI-induced distance. They differ only in the weight:
//   proposed: w_i = Var(Rice distance to a perturbed anchor) + Var(d_i)
//   baseline: w_i = Var(d_i)           (anchor positions taken as exact)
// Weights are re-evaluated at every iterate but treated as constants when
// differentiating.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "rssiloc/errors.hpp"
#include "rssiloc/pathloss.hpp"
#include "rssiloc/specfun.hpp"
#include "rssiloc/types.hpp"

namespace rssiloc::wls {

/// Lower clamp on every weight (m^2). Keeps the noiseless problem well posed.
inline constexpr double kWeightFloor = 1e-9;

/// Anchors closer than this to the iterate contribute no gradient term.
inline constexpr double kCoincidenceRadius = 1e-9;

enum class Weighting { Proposed, Baseline };

/// How the update length is derived from the gradient.
///   Fixed:            x <- x - alpha grad               (alpha in m^2)
///   WeightNormalized: x <- x - alpha grad / sum_i 1/w_i (alpha dimensionless)
/// The second makes one alpha usable across noise levels and across both
/// weightings, whose weights differ by orders of magnitude. Since the cost
/// curvature is bounded by 2 sum_i 1/w_i, alpha < 1 is stable.
enum class StepRule { Fixed, WeightNormalized };

template <typename Scalar>
struct EstimatorConfig {
  Scalar step_size{1};  // alpha; units depend on step_rule
  StepRule step_rule{StepRule::Fixed};
  int max_iters{300};
  Scalar stop_tol{1e-4};  // stop once the update is shorter than this, m
  PathLossParams<Scalar> params{};
  // Halve alpha after five consecutive cost increases. Off by default.
  bool halve_on_increase{false};
  bool record_trace{false};

  bool operator==(const EstimatorConfig&) const = default;
};

template <typename Scalar>
struct TraceEntry {
  Point<Scalar> position;  // iterate at which the step was computed
  Scalar cost;             // cost there, with the weights of that iterate
};

template <typename Scalar>
struct EstimateResult {
  Point<Scalar> position;
  int iterations_used{0};
  bool converged{false};
  std::vector<TraceEntry<Scalar>> trace;  // empty unless requested
};

template <typename Scalar>
void validate(const EstimatorConfig<Scalar>& config) {
  if (!(config.step_size > 0)) throw DomainError("estimator: step_size must be > 0");
  if (config.max_iters < 1) throw DomainError("estimator: max_iters must be >= 1");
  if (!(config.stop_tol >= 0)) throw DomainError("estimator: stop_tol must be >= 0");
  pathloss::validate(config.params);
}

namespace detail {

template <typename Scalar>
Scalar floor_weight(Scalar w) {
  if (!std::isfinite(w)) throw DegenerateWeightError("estimator: non-finite weight");
  return std::max(w, Scalar(kWeightFloor));
}

}  // namespace detail

/// Variance of delta_bar - d_tilde for one anchor, floored at kWeightFloor.
template <typename Scalar>
Scalar error_weight(Scalar delta_bar, Scalar d_tilde, Scalar sigma_a, Scalar sigma_d) {
  return detail::floor_weight(specfun::rice_variance(delta_bar, sigma_a) +
                              pathloss::lognormal_distance_variance(d_tilde, sigma_d));
}

/// Weight used by the baseline: RSSI-induced distance variance only.
template <typename Scalar>
Scalar baseline_weight(Scalar d_tilde, Scalar sigma_d) {
  return detail::floor_weight(pathloss::lognormal_distance_variance(d_tilde, sigma_d));
}

/// Per-anchor quantities that do not change across iterations.
template <typename Scalar>
struct PreparedReading {
  Point<Scalar> pos;
  Scalar sigma_a;
  Scalar d_tilde;
  Scalar distance_variance;  // Var(d_tilde)
};

template <typename Scalar>
std::vector<PreparedReading<Scalar>> prepare(std::span<const AnchorReading<Scalar>> readings,
                                             const PathLossParams<Scalar>& params) {
  std::vector<PreparedReading<Scalar>> out;
  out.reserve(readings.size());
  for (const auto& r : readings) {
    if (r.sigma_a < 0 || r.sigma_p < 0) throw DomainError("estimator: negative noise std-dev in reading");
    const Scalar d_tilde = pathloss::invert_rssi_to_distance(r.rssi_dbm, params);
    const Scalar sd = pathloss::sigma_d(r.sigma_p, params.eta);
    out.push_back({r.pos, r.sigma_a, d_tilde, pathloss::lognormal_distance_variance(d_tilde, sd)});
  }
  return out;
}

template <typename Scalar>
Scalar weight_at(const PreparedReading<Scalar>& r, Scalar delta_bar, Weighting weighting) {
  if (weighting == Weighting::Baseline) return detail::floor_weight(r.distance_variance);
  return detail::floor_weight(specfun::rice_variance(delta_bar, r.sigma_a) + r.distance_variance);
}

/// Weights of every anchor evaluated at `estimate`.
template <typename Scalar>
std::vector<Scalar> weights(const Point<Scalar>& estimate, std::span<const AnchorReading<Scalar>> readings,
                            const EstimatorConfig<Scalar>& config, Weighting weighting = Weighting::Proposed) {
  const auto prepared = prepare(readings, config.params);
  std::vector<Scalar> w;
  w.reserve(prepared.size());
  for (const auto& r : prepared) w.push_back(weight_at(r, (r.pos - estimate).norm(), weighting));
  return w;
}

/// Cost with caller-supplied (frozen) weights.
template <typename Scalar>
Scalar cost_with_weights(const Point<Scalar>& estimate, std::span<const AnchorReading<Scalar>> readings,
                         const EstimatorConfig<Scalar>& config, std::span<const Scalar> w) {
  const auto prepared = prepare(readings, config.params);
  Scalar c = 0;
  for (std::size_t i = 0; i < prepared.size(); ++i) {
    const Scalar e = (prepared[i].pos - estimate).norm() - prepared[i].d_tilde;
    c += e * e / w[i];
  }
  return c;
}

/// WLS cost with weights evaluated at `estimate`.
template <typename Scalar>
Scalar cost(const Point<Scalar>& estimate, std::span<const AnchorReading<Scalar>> readings,
            const EstimatorConfig<Scalar>& config, Weighting weighting = Weighting::Proposed) {
  if (readings.empty()) throw DomainError("cost: need at least one reading");
  const auto w = weights(estimate, readings, config, weighting);
  return cost_with_weights(estimate, readings, config, std::span<const Scalar>(w));
}

namespace detail {

// Gradient of sum e_i^2 / w_i with w frozen; also returns the cost.
// `weight_of(i, delta_bar)` supplies w_i.
template <typename Scalar, typename WeightFn>
Point<Scalar> accumulate_gradient(const Point<Scalar>& estimate, std::span<const PreparedReading<Scalar>> prepared,
                                  WeightFn&& weight_of, Scalar* cost_out, Scalar* inv_weight_sum = nullptr) {
  Point<Scalar> g = Point<Scalar>::Zero();
  Scalar c = 0;
  Scalar inv_w = 0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < prepared.size(); ++i) {
    const Point<Scalar> diff = prepared[i].pos - estimate;
    const Scalar delta_bar = diff.norm();
    const Scalar w = weight_of(i, delta_bar);
    const Scalar e = delta_bar - prepared[i].d_tilde;
    c += e * e / w;
    inv_w += Scalar(1) / w;
    if (delta_bar < Scalar(kCoincidenceRadius)) continue;
    g -= (Scalar(2) * e / (w * delta_bar)) * diff;
    ++used;
  }
  if (used == 0) throw SingularityError("gradient: estimate coincides with every reported anchor position");
  if (cost_out) *cost_out = c;
  if (inv_weight_sum) *inv_weight_sum = inv_w;
  return g;
}

}  // namespace detail

/// Gradient of the cost with the supplied weights held fixed.
template <typename Scalar>
Point<Scalar> gradient_with_weights(const Point<Scalar>& estimate, std::span<const AnchorReading<Scalar>> readings,
                                    const EstimatorConfig<Scalar>& config, std::span<const Scalar> w) {
  const auto prepared = prepare(readings, config.params);
  return detail::accumulate_gradient<Scalar>(
      estimate, prepared, [&](std::size_t i, Scalar) { return w[i]; }, nullptr);
}

/// Gradient of the cost at `estimate`, weights frozen at their values there.
template <typename Scalar>
Point<Scalar> gradient(const Point<Scalar>& estimate, std::span<const AnchorReading<Scalar>> readings,
                       const EstimatorConfig<Scalar>& config, Weighting weighting = Weighting::Proposed) {
  const auto prepared = prepare(readings, config.params);
  return detail::accumulate_gradient<Scalar>(
      estimate, prepared, [&](std::size_t i, Scalar delta) { return weight_at(prepared[i], delta, weighting); },
      nullptr);
}

/// Gradient descent from `init`. Per iteration the work is linear in the
/// number of anchors.
template <typename Scalar>
EstimateResult<Scalar> estimate_position(std::span<const AnchorReading<Scalar>> readings, const Point<Scalar>& init,
                                         const EstimatorConfig<Scalar>& config, Weighting weighting) {
  validate(config);
  if (readings.size() < 3) throw DomainError("estimate_position: need at least 3 readings");
  if (!init.allFinite()) throw DomainError("estimate_position: non-finite init");

  const auto prepared = prepare(readings, config.params);
  const std::span<const PreparedReading<Scalar>> view(prepared);

  EstimateResult<Scalar> result;
  if (config.record_trace) result.trace.reserve(static_cast<std::size_t>(config.max_iters));

  Point<Scalar> x = init;
  Scalar alpha = config.step_size;
  Scalar last_cost = std::numeric_limits<Scalar>::infinity();
  int increases = 0;

  for (int k = 0; k < config.max_iters; ++k) {
    Scalar c = 0;
    Scalar inv_w = 0;
    const Point<Scalar> g = detail::accumulate_gradient<Scalar>(
        x, view, [&](std::size_t i, Scalar delta) { return weight_at(prepared[i], delta, weighting); }, &c, &inv_w);
    if (config.record_trace) result.trace.push_back({x, c});

    if (config.halve_on_increase) {
      increases = c > last_cost ? increases + 1 : 0;
      if (increases >= 5) {
        alpha /= Scalar(2);
        increases = 0;
      }
      last_cost = c;
    }

    const Point<Scalar> step =
        config.step_rule == StepRule::WeightNormalized ? Point<Scalar>((alpha / inv_w) * g) : Point<Scalar>(alpha * g);
    x -= step;
    result.iterations_used = k + 1;
    if (step.norm() < config.stop_tol) {
      result.converged = true;
      break;
    }
  }
  result.position = x;
  return result;
}

/// Estimator weighting each anchor by Rice + log-normal variance.
template <typename Scalar>
EstimateResult<Scalar> estimate_position_proposed(std::span<const AnchorReading<Scalar>> readings,
                                                  const Point<Scalar>& init, const EstimatorConfig<Scalar>& config) {
  return estimate_position(readings, init, config, Weighting::Proposed);
}

/// Circular WLS baseline: identical iteration, anchor positions assumed exact.
template <typename Scalar>
EstimateResult<Scalar> estimate_position_baseline(std::span<const AnchorReading<Scalar>> readings,
                                                  const Point<Scalar>& init, const EstimatorConfig<Scalar>& config) {
  return estimate_position(readings, init, config, Weighting::Baseline);
}

}  // namespace rssiloc::wls
