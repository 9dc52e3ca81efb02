#include "rssiloc/scenario_io.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace rssiloc::io {

using nlohmann::json;

namespace {

constexpr double kDefaultNormalizedStep = 0.5;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ScenarioError(where + ": " + what);
}

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> known) {
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) fail(where + "/" + key, "unknown field");
  }
}

const json& require_object(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  return j;
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

double number_or(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  return number(obj.at(key), where + "/" + key);
}

sim::Point point(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) fail(where, "expected [x, y]");
  return {number(j[0], where + "/0"), number(j[1], where + "/1")};
}

sim::Rect rect(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) fail(where, "expected [x_min, y_min, x_max, y_max]");
  sim::Rect r{number(j[0], where + "/0"), number(j[1], where + "/1"), number(j[2], where + "/2"),
              number(j[3], where + "/3")};
  if (!(r.x_min <= r.x_max && r.y_min <= r.y_max)) fail(where, "rectangle has min > max");
  return r;
}

sim::Location location(const json& j, const std::string& where) {
  if (j.is_array()) return point(j, where);
  if (j.is_object() && j.contains("rect")) {
    reject_unknown(j, where, {"rect"});
    return rect(j.at("rect"), where + "/rect");
  }
  fail(where, "expected [x, y] or {\"rect\": [...]}");
}

json to_json(const sim::Point& p) { return json::array({p.x(), p.y()}); }
json to_json(const sim::Rect& r) { return json::array({r.x_min, r.y_min, r.x_max, r.y_max}); }
json to_json(const sim::Location& loc) {
  if (const auto* p = std::get_if<sim::Point>(&loc)) return to_json(*p);
  return json{{"rect", to_json(std::get<sim::Rect>(loc))}};
}

const char* step_rule_name(wls::StepRule rule) {
  return rule == wls::StepRule::WeightNormalized ? "weight_normalized" : "fixed";
}

sim::Scenario from_json(const json& doc) {
  require_object(doc, "");
  reject_unknown(doc, "", {"id", "description", "world", "pathloss", "anchors", "blind", "noise", "estimator"});

  sim::Scenario s;
  if (doc.contains("id")) {
    if (!doc["id"].is_string()) fail("/id", "expected a string");
    s.id = doc["id"].get<std::string>();
  }
  if (doc.contains("description")) {
    if (!doc["description"].is_string()) fail("/description", "expected a string");
    s.description = doc["description"].get<std::string>();
  }
  if (doc.contains("world")) s.world = rect(doc["world"], "/world");

  if (doc.contains("pathloss")) {
    const auto& pl = require_object(doc["pathloss"], "/pathloss");
    reject_unknown(pl, "/pathloss", {"d0", "p0_dbm", "eta"});
    s.pathloss.d0 = number_or(pl, "d0", s.pathloss.d0, "/pathloss");
    s.pathloss.p0_dbm = number_or(pl, "p0_dbm", s.pathloss.p0_dbm, "/pathloss");
    s.pathloss.eta = number_or(pl, "eta", s.pathloss.eta, "/pathloss");
    if (!(s.pathloss.d0 > 0)) fail("/pathloss/d0", "must be > 0");
    if (!(s.pathloss.eta > 0)) fail("/pathloss/eta", "must be > 0");
  }

  // Noise before anchors: regions may append sigma_a overrides.
  if (doc.contains("noise")) {
    const auto& n = require_object(doc["noise"], "/noise");
    reject_unknown(n, "/noise", {"sigma_p", "sigma_a", "sigma_a_regions"});
    s.noise.sigma_a = number_or(n, "sigma_a", 0.0, "/noise");
    if (n.contains("sigma_p")) {
      const auto& sp = n["sigma_p"];
      s.noise.sigma_p.clear();
      if (sp.is_array()) {
        for (std::size_t i = 0; i < sp.size(); ++i) {
          s.noise.sigma_p.push_back(number(sp[i], "/noise/sigma_p/" + std::to_string(i)));
        }
        if (s.noise.sigma_p.empty()) fail("/noise/sigma_p", "sweep list is empty");
      } else {
        s.noise.sigma_p.push_back(number(sp, "/noise/sigma_p"));
      }
      for (double v : s.noise.sigma_p) {
        if (!(v >= 0)) fail("/noise/sigma_p", "values must be >= 0");
      }
    }
    if (!(s.noise.sigma_a >= 0)) fail("/noise/sigma_a", "must be >= 0");
    if (n.contains("sigma_a_regions")) {
      const auto& regions = n["sigma_a_regions"];
      if (!regions.is_array()) fail("/noise/sigma_a_regions", "expected an array");
      for (std::size_t i = 0; i < regions.size(); ++i) {
        const std::string where = "/noise/sigma_a_regions/" + std::to_string(i);
        const auto& r = require_object(regions[i], where);
        reject_unknown(r, where, {"rect", "sigma_a"});
        if (!r.contains("rect") || !r.contains("sigma_a")) fail(where, "needs rect and sigma_a");
        const double sa = number(r["sigma_a"], where + "/sigma_a");
        if (!(sa >= 0)) fail(where + "/sigma_a", "must be >= 0");
        s.noise.sigma_a_regions.push_back({rect(r["rect"], where + "/rect"), sa});
      }
    }
  }

  if (!doc.contains("anchors")) fail("/anchors", "missing");
  {
    const auto& a = require_object(doc["anchors"], "/anchors");
    reject_unknown(a, "/anchors", {"fixed", "regions"});
    if (a.contains("fixed") == a.contains("regions")) fail("/anchors", "give exactly one of fixed or regions");
    if (a.contains("fixed")) {
      const auto& list = a["fixed"];
      if (!list.is_array()) fail("/anchors/fixed", "expected an array of [x, y]");
      sim::FixedPlacement f;
      for (std::size_t i = 0; i < list.size(); ++i) f.anchors.push_back(point(list[i], "/anchors/fixed/" + std::to_string(i)));
      if (f.anchors.size() < 3) fail("/anchors/fixed", "need at least 3 anchors");
      s.anchors = std::move(f);
    } else {
      const auto& list = a["regions"];
      if (!list.is_array()) fail("/anchors/regions", "expected an array");
      sim::RegionPlacement rp;
      for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string where = "/anchors/regions/" + std::to_string(i);
        const auto& r = require_object(list[i], where);
        reject_unknown(r, where, {"rect", "count", "sigma_a"});
        if (!r.contains("rect") || !r.contains("count")) fail(where, "needs rect and count");
        if (!r["count"].is_number_integer() || r["count"].get<int>() < 0) fail(where + "/count", "expected an integer >= 0");
        sim::Region region{rect(r["rect"], where + "/rect"), r["count"].get<int>()};
        if (r.contains("sigma_a")) {
          const double sa = number(r["sigma_a"], where + "/sigma_a");
          if (!(sa >= 0)) fail(where + "/sigma_a", "must be >= 0");
          s.noise.sigma_a_regions.push_back({region.rect, sa});
        }
        rp.regions.push_back(region);
      }
      s.anchors = std::move(rp);
      if (s.anchor_count() < 3) fail("/anchors/regions", "need at least 3 anchors in total");
    }
  }

  if (!doc.contains("blind")) fail("/blind", "missing");
  {
    const auto& b = require_object(doc["blind"], "/blind");
    reject_unknown(b, "/blind", {"truth", "init"});
    if (!b.contains("truth")) fail("/blind/truth", "missing");
    if (!b.contains("init")) fail("/blind/init", "missing");
    s.blind_truth = location(b["truth"], "/blind/truth");
    s.init = location(b["init"], "/blind/init");
  }

  // Without an explicit step, use the normalized rule: its alpha does not
  // depend on the noise levels.
  s.estimator.step_rule = wls::StepRule::WeightNormalized;
  s.estimator.step_size = kDefaultNormalizedStep;
  if (doc.contains("estimator")) {
    const auto& e = require_object(doc["estimator"], "/estimator");
    reject_unknown(e, "/estimator", {"step_size", "step_rule", "max_iters", "stop_tol", "halve_on_increase"});
    s.estimator.step_size = number_or(e, "step_size", s.estimator.step_size, "/estimator");
    s.estimator.stop_tol = number_or(e, "stop_tol", s.estimator.stop_tol, "/estimator");
    if (e.contains("max_iters")) {
      if (!e["max_iters"].is_number_integer()) fail("/estimator/max_iters", "expected an integer");
      s.estimator.max_iters = e["max_iters"].get<int>();
    }
    if (e.contains("step_rule")) {
      const auto& rule = e["step_rule"];
      if (rule == "fixed") {
        s.estimator.step_rule = wls::StepRule::Fixed;
      } else if (rule == "weight_normalized") {
        s.estimator.step_rule = wls::StepRule::WeightNormalized;
      } else {
        fail("/estimator/step_rule", "expected \"fixed\" or \"weight_normalized\"");
      }
    }
    if (e.contains("halve_on_increase")) {
      if (!e["halve_on_increase"].is_boolean()) fail("/estimator/halve_on_increase", "expected a boolean");
      s.estimator.halve_on_increase = e["halve_on_increase"].get<bool>();
    }
    if (!(s.estimator.step_size > 0)) fail("/estimator/step_size", "must be > 0");
    if (s.estimator.max_iters < 1) fail("/estimator/max_iters", "must be >= 1");
    if (!(s.estimator.stop_tol >= 0)) fail("/estimator/stop_tol", "must be >= 0");
  }
  s.estimator.params = s.pathloss;

  try {
    sim::validate(s);
  } catch (const DomainError& e) {
    throw ScenarioError(std::string("invalid scenario: ") + e.what());
  }
  return s;
}

}  // namespace

sim::Scenario parse_scenario(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(origin + ": " + e.what());
  }
  try {
    return from_json(doc);
  } catch (const ScenarioError& e) {
    throw ScenarioError(origin + ": " + e.what());
  }
}

sim::Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path.string() + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

std::string serialize_scenario(const sim::Scenario& s) {
  json doc;
  doc["id"] = s.id;
  if (!s.description.empty()) doc["description"] = s.description;
  doc["world"] = to_json(s.world);
  doc["pathloss"] = {{"d0", s.pathloss.d0}, {"p0_dbm", s.pathloss.p0_dbm}, {"eta", s.pathloss.eta}};

  if (const auto* f = std::get_if<sim::FixedPlacement>(&s.anchors)) {
    json list = json::array();
    for (const auto& a : f->anchors) list.push_back(to_json(a));
    doc["anchors"] = {{"fixed", list}};
  } else {
    json list = json::array();
    for (const auto& r : std::get<sim::RegionPlacement>(s.anchors).regions) {
      list.push_back({{"rect", to_json(r.rect)}, {"count", r.count}});
    }
    doc["anchors"] = {{"regions", list}};
  }

  doc["blind"] = {{"truth", to_json(s.blind_truth)}, {"init", to_json(s.init)}};

  json noise;
  if (s.noise.sigma_p.size() == 1) {
    noise["sigma_p"] = s.noise.sigma_p.front();
  } else {
    noise["sigma_p"] = s.noise.sigma_p;
  }
  noise["sigma_a"] = s.noise.sigma_a;
  if (!s.noise.sigma_a_regions.empty()) {
    json regions = json::array();
    for (const auto& r : s.noise.sigma_a_regions) regions.push_back({{"rect", to_json(r.rect)}, {"sigma_a", r.sigma_a}});
    noise["sigma_a_regions"] = regions;
  }
  doc["noise"] = noise;

  doc["estimator"] = {{"step_size", s.estimator.step_size},
                      {"step_rule", step_rule_name(s.estimator.step_rule)},
                      {"max_iters", s.estimator.max_iters},
                      {"stop_tol", s.estimator.stop_tol},
                      {"halve_on_increase", s.estimator.halve_on_increase}};
  return doc.dump(2) + "\n";
}

std::filesystem::path resolve_scenario_path(const std::string& name_or_path) {
  namespace fs = std::filesystem;
  if (fs::exists(name_or_path)) return name_or_path;
  fs::path dir = RSSILOC_SCENARIO_DIR;
  if (const char* env = std::getenv("RSSILOC_SCENARIO_DIR")) dir = env;
  fs::path candidate = dir / (name_or_path + ".json");
  if (fs::exists(candidate)) return candidate;
  return name_or_path;
}

}  // namespace rssiloc::io
