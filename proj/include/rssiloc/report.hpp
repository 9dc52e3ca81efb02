#pragma once

// Results CSV and histogram sidecars.
//
// Results columns (one row per algorithm x sigma_p cell, numbers in %.6g):
//   scenario_id,algorithm,sigma_p_dbm,n_trials,rmse_m,mean_error_m,
//   converged_frac,crlb_m,seed
// crlb_m is empty when the bound is undefined or not computed.
//
// Histogram sidecars have the header `bin_left_m,count`; bins are 0.5 m wide
// on [0, 20] m and the last bin also holds errors beyond 20 m.

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "rssiloc/simulator.hpp"

namespace rssiloc::report {

inline constexpr std::string_view kResultsHeader =
    "scenario_id,algorithm,sigma_p_dbm,n_trials,rmse_m,mean_error_m,converged_frac,crlb_m,seed";
inline constexpr std::string_view kHistogramHeader = "bin_left_m,count";

/// Six significant digits, shortest form.
std::string format_number(double value);

void write_results_csv(std::ostream& out, const std::string& scenario_id, const std::vector<sim::SummaryStats>& cells,
                       std::uint64_t seed);

void write_histogram(std::ostream& out, const sim::Histogram& histogram);

/// e.g. "fig3_proposed_sp2.hist.csv".
std::string histogram_filename(const std::string& scenario_id, sim::Algorithm algorithm, double sigma_p);

}  // namespace rssiloc::report
