#include "rssiloc/cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rssiloc/crlb.hpp"
#include "rssiloc/report.hpp"
#include "rssiloc/scenario_io.hpp"
#include "rssiloc/simulator.hpp"

namespace rssiloc::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kDefaultSeed = 1;
constexpr int kDefaultTrials = 1000;

struct RunOptions {
  std::string scenario;
  int trials = kDefaultTrials;
  std::uint64_t seed = kDefaultSeed;
  std::string out;
  std::string histograms;
  unsigned threads = 0;
  std::vector<double> sigma_p;
  bool crlb_for_random = false;
};

struct CrlbOptions {
  std::string scenario;
  std::vector<double> sigma_p;
  bool per_trial = false;
  int trials = kDefaultTrials;
  std::uint64_t seed = kDefaultSeed;
  std::string out;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

void report_error(std::ostream& err, std::string_view kind, const std::string& message) {
  nlohmann::json j{{"status", "error"}, {"kind", kind}, {"message", message}};
  err << j.dump() << '\n';
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  return f;
}

int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  const auto scenario = io::load_scenario(io::resolve_scenario_path(opt.scenario));
  if (opt.trials < 1) throw UsageError("--trials must be >= 1");
  const auto& values = opt.sigma_p.empty() ? scenario.noise.sigma_p : opt.sigma_p;
  for (double v : values) {
    if (!(v >= 0)) throw UsageError("--sigma-p values must be >= 0");
  }

  sim::MonteCarloOptions mc;
  mc.threads = opt.threads;
  mc.crlb_for_random = opt.crlb_for_random;
  const auto cells = sim::sweep(scenario, values, opt.trials, opt.seed, mc);
  const std::string id = scenario.id.empty() ? fs::path(opt.scenario).stem().string() : scenario.id;

  if (opt.out.empty()) {
    report::write_results_csv(out, id, cells, opt.seed);
  } else {
    auto f = open_output(opt.out);
    report::write_results_csv(f, id, cells, opt.seed);
  }

  std::optional<fs::path> hist_dir;
  if (!opt.histograms.empty()) {
    hist_dir = opt.histograms;
  } else if (!opt.out.empty()) {
    hist_dir = fs::path(opt.out).parent_path();
  }
  if (hist_dir) {
    for (const auto& cell : cells) {
      for (sim::Algorithm alg : sim::kAlgorithms) {
        auto f = open_output(*hist_dir / report::histogram_filename(id, alg, cell.sigma_p));
        report::write_histogram(f, cell.of(alg).histogram);
      }
    }
  }

  for (const auto& cell : cells) {
    for (sim::Algorithm alg : sim::kAlgorithms) {
      if (const int n = cell.of(alg).failures; n > 0) {
        nlohmann::json j{{"status", "warning"},
                         {"algorithm", sim::algorithm_name(alg)},
                         {"sigma_p_dbm", cell.sigma_p},
                         {"failed_trials", n}};
        err << j.dump() << '\n';
      }
    }
  }
  return 0;
}

int cmd_crlb(const CrlbOptions& opt, std::ostream& out) {
  const auto scenario = io::load_scenario(io::resolve_scenario_path(opt.scenario));
  const bool fixed_layout = scenario.is_fixed() && std::holds_alternative<sim::Point>(scenario.blind_truth);
  if (!fixed_layout && !opt.per_trial) {
    throw UsageError("scenario has a random layout; pass --per-trial to average the bound over sampled layouts");
  }
  if (opt.trials < 1) throw UsageError("--trials must be >= 1");
  const auto& values = opt.sigma_p.empty() ? scenario.noise.sigma_p : opt.sigma_p;

  std::ostringstream table;
  table << "sigma_p_dbm,crlb_m\n";
  for (double sp : values) {
    if (!(sp > 0)) {
      throw DomainError("sigma_p = " + report::format_number(sp) +
                        " dBm: the bound needs sigma_p > 0 (noiseless RSSI gives infinite information)");
    }
    auto check_sigma_a = [&](const std::vector<sim::Point>& anchors) {
      for (const auto& a : anchors) {
        if (!(scenario.noise.sigma_a_at(a) > 0)) {
          throw DomainError("sigma_a = 0 for an anchor: the bound needs sigma_a > 0 (use a small value for the "
                            "known-anchor limit)");
        }
      }
    };
    double bound = 0;
    if (fixed_layout) {
      const auto& anchors = std::get<sim::FixedPlacement>(scenario.anchors).anchors;
      check_sigma_a(anchors);
      std::vector<double> sigma_a;
      for (const auto& a : anchors) sigma_a.push_back(scenario.noise.sigma_a_at(a));
      crlb::ParameterVector<double> theta{std::get<sim::Point>(scenario.blind_truth), anchors};
      crlb::NoiseSpec<double> noise{sigma_a, std::vector<double>(anchors.size(), sp), scenario.pathloss};
      bound = crlb::crlb_rmse_bound(theta, noise);
    } else {
      check_sigma_a(sim::instantiate(scenario, sp, 0, opt.seed).anchors_true);
      const auto b = sim::scenario_crlb(scenario, sp, opt.trials, opt.seed);
      if (!b) throw SingularGeometryError("every sampled layout gave a singular bound");
      bound = *b;
    }
    table << report::format_number(sp) << ',' << report::format_number(bound) << '\n';
  }

  out << table.str();
  if (!opt.out.empty()) {
    auto f = open_output(opt.out);
    f << table.str();
  }
  return 0;
}

void add_run_flags(CLI::App* cmd, RunOptions& opt) {
  cmd->add_option("--scenario", opt.scenario, "Scenario file or shipped scenario name")->required();
  cmd->add_option("--trials", opt.trials, "Monte-Carlo trials per sigma_p cell")->capture_default_str();
  cmd->add_option("--seed", opt.seed, "Master seed")->capture_default_str();
  cmd->add_option("--out", opt.out, "Results CSV path (default: standard output)");
  cmd->add_option("--histograms", opt.histograms, "Directory for histogram sidecars (default: next to --out)");
  cmd->add_option("--threads", opt.threads, "Worker threads (0 = all cores)");
  cmd->add_flag("--crlb-random", opt.crlb_for_random, "Average the CRLB over sampled layouts for random scenarios");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Self-localization from perturbed anchors and RSSI: Monte-Carlo runs and Cramer-Rao bounds",
               "rssiloc"};
  app.require_subcommand(1);

  RunOptions run_opt;
  auto* run = app.add_subcommand("run", "Run the scenario's sigma_p cells and write the results CSV");
  add_run_flags(run, run_opt);
  run->add_option("--sigma-p", run_opt.sigma_p, "Override the scenario's sigma_p values (dBm)")->delimiter(',');

  RunOptions sweep_opt;
  auto* sweep = app.add_subcommand("sweep", "Like run, with an explicit sigma_p list");
  add_run_flags(sweep, sweep_opt);
  sweep->add_option("--sigma-p", sweep_opt.sigma_p, "sigma_p values (dBm), comma separated")
      ->delimiter(',')
      ->required();

  CrlbOptions crlb_opt;
  auto* crlb_cmd = app.add_subcommand("crlb", "Print the RMSE lower bound per sigma_p");
  crlb_cmd->add_option("--scenario", crlb_opt.scenario, "Scenario file or shipped scenario name")->required();
  crlb_cmd->add_option("--sigma-p", crlb_opt.sigma_p, "sigma_p values (dBm); default: the scenario's")
      ->delimiter(',');
  crlb_cmd->add_flag("--per-trial", crlb_opt.per_trial, "Average over sampled layouts (random scenarios)");
  crlb_cmd->add_option("--trials", crlb_opt.trials, "Layouts to average with --per-trial")->capture_default_str();
  crlb_cmd->add_option("--seed", crlb_opt.seed, "Master seed for --per-trial")->capture_default_str();
  crlb_cmd->add_option("--out", crlb_opt.out, "Also write the table to this CSV file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e, out, err);
    }
    report_error(err, "usage", e.what());
    return 2;
  }

  try {
    if (*run) return cmd_run(run_opt, out, err);
    if (*sweep) return cmd_run(sweep_opt, out, err);
    return cmd_crlb(crlb_opt, out);
  } catch (const io::ScenarioError& e) {
    report_error(err, "scenario", e.what());
  } catch (const UsageError& e) {
    report_error(err, "usage", e.what());
    return 2;
  } catch (const DomainError& e) {
    report_error(err, "domain", e.what());
  } catch (const SingularGeometryError& e) {
    report_error(err, "singular_geometry", e.what());
  } catch (const std::exception& e) {
    report_error(err, "runtime", e.what());
  }
  return 1;
}

}  // namespace rssiloc::cli
