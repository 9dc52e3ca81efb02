#include "rssiloc/simulator.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <thread>

#include "rssiloc/crlb.hpp"
#include "rssiloc/pathloss.hpp"

namespace rssiloc::sim {

namespace {

enum StreamTag : std::uint64_t { kPlacement = 1, kBlind = 2, kInit = 3, kReadings = 4 };

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t master_seed, double sigma_p, std::uint64_t trial_index, std::uint64_t tag) {
  // +0.0 and -0.0 must share a stream.
  const double sp = sigma_p == 0.0 ? 0.0 : sigma_p;
  std::uint64_t h = splitmix64(master_seed);
  h = splitmix64(h ^ std::bit_cast<std::uint64_t>(sp));
  h = splitmix64(h ^ trial_index);
  return splitmix64(h ^ tag);
}

Point sample_in(const Rect& r, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ux(r.x_min, r.x_max);
  std::uniform_real_distribution<double> uy(r.y_min, r.y_max);
  const double x = ux(rng);
  const double y = uy(rng);
  return {x, y};
}

Point resolve(const Location& loc, std::mt19937_64& rng) {
  if (const auto* p = std::get_if<Point>(&loc)) return *p;
  return sample_in(std::get<Rect>(loc), rng);
}

bool location_inside(const Location& loc, const Rect& world) {
  if (const auto* p = std::get_if<Point>(&loc)) return world.contains(*p);
  const auto& r = std::get<Rect>(loc);
  return r.x_min <= r.x_max && r.y_min <= r.y_max && r.inside(world);
}

}  // namespace

double NoiseField::sigma_a_at(const Point& anchor) const {
  for (const auto& region : sigma_a_regions) {
    if (region.rect.contains(anchor)) return region.sigma_a;
  }
  return sigma_a;
}

std::size_t Scenario::anchor_count() const {
  if (const auto* f = std::get_if<FixedPlacement>(&anchors)) return f->anchors.size();
  std::size_t n = 0;
  for (const auto& r : std::get<RegionPlacement>(anchors).regions) n += static_cast<std::size_t>(r.count);
  return n;
}

void validate(const Scenario& s) {
  if (!(s.world.x_max > s.world.x_min && s.world.y_max > s.world.y_min)) {
    throw DomainError("world: rectangle must have positive extent");
  }
  if (s.anchor_count() < 3) throw DomainError("anchors: need at least 3 anchors");
  if (const auto* f = std::get_if<FixedPlacement>(&s.anchors)) {
    for (const auto& a : f->anchors) {
      if (!a.allFinite()) throw DomainError("anchors: non-finite coordinate");
    }
  } else {
    for (const auto& r : std::get<RegionPlacement>(s.anchors).regions) {
      if (r.count < 0) throw DomainError("anchors: region count must be >= 0");
      if (!(r.rect.x_min <= r.rect.x_max && r.rect.y_min <= r.rect.y_max) || !r.rect.inside(s.world)) {
        throw DomainError("anchors: region rectangle must lie within the world");
      }
    }
  }
  if (!location_inside(s.blind_truth, s.world)) throw DomainError("blind.truth: must lie inside the world");
  if (!location_inside(s.init, s.world)) throw DomainError("blind.init: must lie inside the world");
  if (!(s.noise.sigma_a >= 0)) throw DomainError("noise.sigma_a: must be >= 0");
  for (const auto& r : s.noise.sigma_a_regions) {
    if (!(r.sigma_a >= 0)) throw DomainError("noise.sigma_a_regions: sigma_a must be >= 0");
  }
  if (s.noise.sigma_p.empty()) throw DomainError("noise.sigma_p: need at least one value");
  for (double sp : s.noise.sigma_p) {
    if (!(sp >= 0)) throw DomainError("noise.sigma_p: values must be >= 0");
  }
  if (!(s.pathloss.d0 > 0)) throw DomainError("pathloss.d0: must be > 0");
  if (!(s.pathloss.eta > 0)) throw DomainError("pathloss.eta: must be > 0");
  if (!(s.estimator.step_size > 0)) throw DomainError("estimator.step_size: must be > 0");
  if (s.estimator.max_iters < 1) throw DomainError("estimator.max_iters: must be >= 1");
  if (!(s.estimator.stop_tol >= 0)) throw DomainError("estimator.stop_tol: must be >= 0");
}

std::mt19937_64 substream(std::uint64_t master_seed, double sigma_p, std::uint64_t trial_index, std::uint64_t tag) {
  return std::mt19937_64(mix(master_seed, sigma_p, trial_index, tag));
}

Reading sample_anchor_reading(const Point& true_pos, double sigma_a, const Point& blind_true, double sigma_p,
                              const PathLoss& params, std::mt19937_64& rng) {
  const double d = (true_pos - blind_true).norm();
  if (!(d > 0)) throw DomainError("sample_anchor_reading: anchor coincides with the blind node");
  std::normal_distribution<double> unit(0.0, 1.0);
  // Fixed draw order (x, y, rssi) so zero sigmas consume the stream identically.
  const double nx = unit(rng);
  const double ny = unit(rng);
  const double np = unit(rng);
  Reading r;
  r.pos = true_pos + Point(sigma_a * nx, sigma_a * ny);
  r.sigma_a = sigma_a;
  r.rssi_dbm = pathloss::mean_rssi_dbm(d, params) + sigma_p * np;
  r.sigma_p = sigma_p;
  return r;
}

TrialInstance instantiate(const Scenario& scenario, double sigma_p, std::uint64_t trial_index,
                          std::uint64_t master_seed) {
  TrialInstance t;
  t.seed = mix(master_seed, sigma_p, trial_index, 0);

  if (const auto* f = std::get_if<FixedPlacement>(&scenario.anchors)) {
    t.anchors_true = f->anchors;
  } else {
    auto rng = substream(master_seed, sigma_p, trial_index, kPlacement);
    for (const auto& region : std::get<RegionPlacement>(scenario.anchors).regions) {
      for (int k = 0; k < region.count; ++k) t.anchors_true.push_back(sample_in(region.rect, rng));
    }
  }
  for (const auto& a : t.anchors_true) t.sigma_a.push_back(scenario.noise.sigma_a_at(a));

  {
    auto rng = substream(master_seed, sigma_p, trial_index, kBlind);
    t.blind_truth = resolve(scenario.blind_truth, rng);
  }
  {
    auto rng = substream(master_seed, sigma_p, trial_index, kInit);
    t.init = resolve(scenario.init, rng);
  }

  auto rng = substream(master_seed, sigma_p, trial_index, kReadings);
  t.readings.reserve(t.anchors_true.size());
  for (std::size_t i = 0; i < t.anchors_true.size(); ++i) {
    t.readings.push_back(
        sample_anchor_reading(t.anchors_true[i], t.sigma_a[i], t.blind_truth, sigma_p, scenario.pathloss, rng));
  }
  return t;
}

const char* algorithm_name(Algorithm a) { return a == Algorithm::Proposed ? "proposed" : "baseline"; }

std::uint64_t checksum(const std::vector<Reading>& readings) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& r : readings) {
    feed(r.pos.x());
    feed(r.pos.y());
    feed(r.sigma_a);
    feed(r.rssi_dbm);
    feed(r.sigma_p);
  }
  return h;
}

TrialResult run_trial(const Scenario& scenario, double sigma_p, std::uint64_t trial_index, std::uint64_t master_seed) {
  TrialResult result;
  result.instance = instantiate(scenario, sigma_p, trial_index, master_seed);
  result.readings_checksum = checksum(result.instance.readings);

  EstimatorConfig config = scenario.estimator;
  config.params = scenario.pathloss;
  const std::span<const Reading> readings(result.instance.readings);

  for (Algorithm alg : kAlgorithms) {
    auto& out = result.outcomes[static_cast<int>(alg)];
    const auto weighting = alg == Algorithm::Proposed ? wls::Weighting::Proposed : wls::Weighting::Baseline;
    try {
      const auto est = wls::estimate_position(readings, result.instance.init, config, weighting);
      out.estimate = est.position;
      out.iterations_used = est.iterations_used;
      out.converged = est.converged;
    } catch (const Error& e) {
      out.estimate = result.instance.init;
      out.failed = true;
      out.failure = e.what();
    }
    out.error = (out.estimate - result.instance.blind_truth).norm();
  }
  return result;
}

void Histogram::add(double error) {
  int bin = static_cast<int>(std::floor(error / kBinWidth));
  if (!(error >= 0)) bin = 0;
  counts[static_cast<std::size_t>(std::clamp(bin, 0, kBins - 1))] += 1;
}

int Histogram::total() const {
  int n = 0;
  for (int c : counts) n += c;
  return n;
}

namespace {

std::optional<double> layout_crlb(const std::vector<Point>& anchors, const std::vector<double>& sigma_a,
                                  const Point& blind, double sigma_p, const PathLoss& params) {
  crlb::ParameterVector<double> theta{blind, anchors};
  crlb::NoiseSpec<double> noise{sigma_a, std::vector<double>(anchors.size(), sigma_p), params};
  try {
    return crlb::crlb_rmse_bound(theta, noise);
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

std::optional<double> scenario_crlb(const Scenario& scenario, double sigma_p, int n_layouts,
                                    std::uint64_t master_seed) {
  if (!(sigma_p > 0)) return std::nullopt;
  const auto* fixed = std::get_if<FixedPlacement>(&scenario.anchors);
  const auto* blind = std::get_if<Point>(&scenario.blind_truth);
  if (fixed && blind) {
    std::vector<double> sigma_a;
    for (const auto& a : fixed->anchors) sigma_a.push_back(scenario.noise.sigma_a_at(a));
    return layout_crlb(fixed->anchors, sigma_a, *blind, sigma_p, scenario.pathloss);
  }
  double sum = 0;
  int used = 0;
  for (int k = 0; k < n_layouts; ++k) {
    const auto t = instantiate(scenario, sigma_p, static_cast<std::uint64_t>(k), master_seed);
    if (auto b = layout_crlb(t.anchors_true, t.sigma_a, t.blind_truth, sigma_p, scenario.pathloss)) {
      sum += *b;
      ++used;
    }
  }
  if (used == 0) return std::nullopt;
  return sum / used;
}

SummaryStats run_monte_carlo(const Scenario& scenario, double sigma_p, int n_trials, std::uint64_t master_seed,
                             const MonteCarloOptions& options) {
  if (n_trials < 1) throw DomainError("run_monte_carlo: n_trials must be >= 1");
  validate(scenario);

  std::vector<TrialResult> trials(static_cast<std::size_t>(n_trials));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < n_trials; i = next.fetch_add(1)) {
      trials[static_cast<std::size_t>(i)] = run_trial(scenario, sigma_p, static_cast<std::uint64_t>(i), master_seed);
    }
  };
  unsigned n_threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(n_trials));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  // Reduction in trial order so the result does not depend on scheduling.
  SummaryStats stats;
  stats.sigma_p = sigma_p;
  stats.n_trials = n_trials;
  for (Algorithm alg : kAlgorithms) {
    const int a = static_cast<int>(alg);
    auto& summary = stats.algorithms[a];
    double sum_sq = 0, sum = 0;
    int converged = 0;
    for (const auto& t : trials) {
      const auto& o = t.outcomes[a];
      sum_sq += o.error * o.error;
      sum += o.error;
      converged += o.converged ? 1 : 0;
      summary.failures += o.failed ? 1 : 0;
      summary.histogram.add(o.error);
    }
    summary.rmse = std::sqrt(sum_sq / n_trials);
    summary.mean_error = sum / n_trials;
    summary.converged_fraction = static_cast<double>(converged) / n_trials;
  }

  if (scenario.is_fixed() && std::holds_alternative<Point>(scenario.blind_truth)) {
    stats.crlb = scenario_crlb(scenario, sigma_p, 1, master_seed);
  } else if (options.crlb_for_random) {
    stats.crlb = scenario_crlb(scenario, sigma_p, n_trials, master_seed);
  }
  return stats;
}

SummaryStats run_monte_carlo(const Scenario& scenario, int n_trials, std::uint64_t master_seed,
                             const MonteCarloOptions& options) {
  if (scenario.noise.sigma_p.size() != 1) {
    throw DomainError("run_monte_carlo: scenario has a sigma_p sweep; use sweep()");
  }
  return run_monte_carlo(scenario, scenario.noise.sigma_p.front(), n_trials, master_seed, options);
}

std::vector<SummaryStats> sweep(const Scenario& scenario, const std::vector<double>& sigma_p_values, int n_trials,
                                std::uint64_t master_seed, const MonteCarloOptions& options) {
  if (sigma_p_values.empty()) throw DomainError("sweep: need at least one sigma_p value");
  std::vector<SummaryStats> out;
  out.reserve(sigma_p_values.size());
  for (double sp : sigma_p_values) out.push_back(run_monte_carlo(scenario, sp, n_trials, master_seed, options));
  return out;
}

}  // namespace rssiloc::sim
