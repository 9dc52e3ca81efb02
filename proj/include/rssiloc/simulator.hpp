#pragma once

// Monte-Carlo experiment harness: scenario description, noise sampling,
// paired trials of both estimators and RMSE / histogram aggregation.

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "rssiloc/estimator.hpp"
#include "rssiloc/types.hpp"

namespace rssiloc::sim {

using Point = Point2d;
using Reading = AnchorReading<double>;
using EstimatorConfig = wls::EstimatorConfig<double>;
using PathLoss = PathLossParams<double>;

/// Axis-aligned rectangle in meters.
struct Rect {
  double x_min{0}, y_min{0}, x_max{0}, y_max{0};

  bool contains(const Point& p) const {
    return p.x() >= x_min && p.x() <= x_max && p.y() >= y_min && p.y() <= y_max;
  }
  bool inside(const Rect& outer) const {
    return x_min >= outer.x_min && y_min >= outer.y_min && x_max <= outer.x_max && y_max <= outer.y_max;
  }
  bool operator==(const Rect&) const = default;
};

struct FixedPlacement {
  std::vector<Point> anchors;
  bool operator==(const FixedPlacement&) const = default;
};

struct Region {
  Rect rect;
  int count{0};
  bool operator==(const Region&) const = default;
};

struct RegionPlacement {
  std::vector<Region> regions;
  bool operator==(const RegionPlacement&) const = default;
};

using PlacementSpec = std::variant<FixedPlacement, RegionPlacement>;

/// sigma_a of an anchor in the first rectangle containing its true position.
struct SigmaARegion {
  Rect rect;
  double sigma_a{0};
  bool operator==(const SigmaARegion&) const = default;
};

struct NoiseField {
  double sigma_a{0};  // default for anchors outside every region
  std::vector<SigmaARegion> sigma_a_regions;
  std::vector<double> sigma_p{0};  // one cell per value

  double sigma_a_at(const Point& anchor) const;
  bool operator==(const NoiseField&) const = default;
};

/// A fixed point or a rectangle sampled uniformly per trial.
using Location = std::variant<Point, Rect>;

struct Scenario {
  std::string id;
  std::string description;
  Rect world{0, 0, 35, 35};
  PlacementSpec anchors;
  NoiseField noise;
  Location blind_truth;
  Location init;
  PathLoss pathloss{};
  EstimatorConfig estimator{};

  std::size_t anchor_count() const;
  bool is_fixed() const { return std::holds_alternative<FixedPlacement>(anchors); }
  bool operator==(const Scenario&) const = default;
};

/// Throws DomainError naming the violated invariant.
void validate(const Scenario& scenario);

/// Random stream for one (seed, sigma_p cell, trial, purpose) tuple.
/// Independent of the order in which trials execute.
std::mt19937_64 substream(std::uint64_t master_seed, double sigma_p, std::uint64_t trial_index, std::uint64_t tag);

/// One noisy observation of an anchor under Gaussian position and RSSI noise.
Reading sample_anchor_reading(const Point& true_pos, double sigma_a, const Point& blind_true, double sigma_p,
                              const PathLoss& params, std::mt19937_64& rng);

struct TrialInstance {
  std::vector<Point> anchors_true;
  std::vector<double> sigma_a;
  Point blind_truth;
  Point init;
  std::vector<Reading> readings;
  std::uint64_t seed{0};  // trial seed, for reporting
};

TrialInstance instantiate(const Scenario& scenario, double sigma_p, std::uint64_t trial_index,
                          std::uint64_t master_seed);

enum class Algorithm { Proposed = 0, Baseline = 1 };
inline constexpr std::array<Algorithm, 2> kAlgorithms{Algorithm::Proposed, Algorithm::Baseline};
const char* algorithm_name(Algorithm a);

struct AlgorithmOutcome {
  Point estimate;
  double error{0};
  int iterations_used{0};
  bool converged{false};
  bool failed{false};  // estimator raised; estimate falls back to the init
  std::string failure;
};

struct TrialResult {
  TrialInstance instance;
  std::array<AlgorithmOutcome, 2> outcomes;  // indexed by Algorithm
  std::uint64_t readings_checksum{0};
};

/// FNV-1a over the bit patterns of every reading.
std::uint64_t checksum(const std::vector<Reading>& readings);

TrialResult run_trial(const Scenario& scenario, double sigma_p, std::uint64_t trial_index, std::uint64_t master_seed);

struct Histogram {
  static constexpr double kBinWidth = 0.5;
  static constexpr double kUpper = 20.0;
  static constexpr int kBins = 40;

  std::vector<int> counts = std::vector<int>(kBins, 0);

  /// Values at or beyond kUpper land in the last bin.
  void add(double error);
  int total() const;
  static double bin_left(int i) { return i * kBinWidth; }
};

struct AlgorithmSummary {
  double rmse{0};
  double mean_error{0};
  double converged_fraction{0};
  int failures{0};
  Histogram histogram;
};

struct SummaryStats {
  double sigma_p{0};
  int n_trials{0};
  std::array<AlgorithmSummary, 2> algorithms;  // indexed by Algorithm
  std::optional<double> crlb;  // absent when undefined (a zero sigma) or omitted

  const AlgorithmSummary& of(Algorithm a) const { return algorithms[static_cast<int>(a)]; }
};

struct MonteCarloOptions {
  unsigned threads{0};  // 0 = hardware concurrency
  // Average the bound over per-trial layouts for region-random scenarios.
  bool crlb_for_random{false};
};

/// CRLB at the scenario's layout for a fixed placement, or averaged over
/// `n_layouts` sampled layouts otherwise. Empty when a noise std-dev is zero.
std::optional<double> scenario_crlb(const Scenario& scenario, double sigma_p, int n_layouts,
                                    std::uint64_t master_seed);

SummaryStats run_monte_carlo(const Scenario& scenario, double sigma_p, int n_trials, std::uint64_t master_seed,
                             const MonteCarloOptions& options = {});

/// Single-cell run; the scenario must carry exactly one sigma_p value.
SummaryStats run_monte_carlo(const Scenario& scenario, int n_trials, std::uint64_t master_seed,
                             const MonteCarloOptions& options = {});

std::vector<SummaryStats> sweep(const Scenario& scenario, const std::vector<double>& sigma_p_values, int n_trials,
                                std::uint64_t master_seed, const MonteCarloOptions& options = {});

}  // namespace rssiloc::sim
