#include "rssiloc/report.hpp"

#include <cstdio>

namespace rssiloc::report {

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", value == 0.0 ? 0.0 : value);
  return buf;
}

void write_results_csv(std::ostream& out, const std::string& scenario_id, const std::vector<sim::SummaryStats>& cells,
                       std::uint64_t seed) {
  out << kResultsHeader << '\n';
  for (const auto& cell : cells) {
    for (sim::Algorithm alg : sim::kAlgorithms) {
      const auto& a = cell.of(alg);
      out << scenario_id << ',' << sim::algorithm_name(alg) << ',' << format_number(cell.sigma_p) << ','
          << cell.n_trials << ',' << format_number(a.rmse) << ',' << format_number(a.mean_error) << ','
          << format_number(a.converged_fraction) << ',' << (cell.crlb ? format_number(*cell.crlb) : "") << ','
          << seed << '\n';
    }
  }
}

void write_histogram(std::ostream& out, const sim::Histogram& histogram) {
  out << kHistogramHeader << '\n';
  for (int i = 0; i < sim::Histogram::kBins; ++i) {
    out << format_number(sim::Histogram::bin_left(i)) << ',' << histogram.counts[static_cast<std::size_t>(i)] << '\n';
  }
}

std::string histogram_filename(const std::string& scenario_id, sim::Algorithm algorithm, double sigma_p) {
  return scenario_id + "_" + sim::algorithm_name(algorithm) + "_sp" + format_number(sigma_p) + ".hist.csv";
}

}  // namespace rssiloc::report
