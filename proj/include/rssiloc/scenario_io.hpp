#pragma once

// Scenario documents (JSON). Layout:
//
//   {
//     "id": "fig3",
//     "description": "...",
//     "world":    [x_min, y_min, x_max, y_max],            default [0,0,35,35]
//     "pathloss": {"d0": 1, "p0_dbm": -33.44, "eta": 3.567},
//     "anchors":  {"fixed": [[x, y], ...]}
//              or {"regions": [{"rect": [..], "count": 3, "sigma_a": 5}, ...]},
//     "blind":    {"truth": [x, y] | {"rect": [..]}, "init": [x, y] | {"rect": [..]}},
//     "noise":    {"sigma_p": 2 | [1, 2, 3], "sigma_a": 1,
//                  "sigma_a_regions": [{"rect": [..], "sigma_a": 6}, ...]},
//     "estimator": {"step_size": 0.5, "step_rule": "fixed" | "weight_normalized",
//                   "max_iters": 300, "stop_tol": 1e-4, "halve_on_increase": false}
//   }
//
// Omitted pathloss / max_iters / stop_tol / world fields take their defaults.
// A "sigma_a" on a region is shorthand for a sigma_a_regions entry with the
// same rectangle.

#include <filesystem>
#include <string>

#include "rssiloc/errors.hpp"
#include "rssiloc/simulator.hpp"

namespace rssiloc::io {

/// Syntax error or invalid field in a scenario document. what() carries the
/// location: "line L, column C" for syntax errors, a JSON pointer for fields.
class ScenarioError : public Error {
 public:
  using Error::Error;
};

sim::Scenario parse_scenario(const std::string& text, const std::string& origin = "<string>");
sim::Scenario load_scenario(const std::filesystem::path& path);

/// Canonical document for a scenario; parse_scenario() of the result yields an
/// equal Scenario.
std::string serialize_scenario(const sim::Scenario& scenario);

/// `name_or_path` if it exists, otherwise <dir>/<name>.json where dir is
/// $RSSILOC_SCENARIO_DIR or the shipped scenario directory.
std::filesystem::path resolve_scenario_path(const std::string& name_or_path);

}  // namespace rssiloc::io
