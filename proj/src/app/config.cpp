#include "blowup/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "blowup/verify.hpp"

namespace blowup {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
}

double number(const json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError("'" + key + "' must be a number");
  return j.get<double>();
}

bool boolean(const json& j, const std::string& key) {
  if (!j.is_boolean()) throw ConfigError("'" + key + "' must be a boolean");
  return j.get<bool>();
}

std::string text(const json& j, const std::string& key) {
  if (!j.is_string()) throw ConfigError("'" + key + "' must be a string");
  return j.get<std::string>();
}

int integer(const json& j, const std::string& key) {
  if (!j.is_number_integer()) throw ConfigError("'" + key + "' must be an integer");
  return j.get<int>();
}

void positive(double v, const std::string& key) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("'" + key + "' must be positive");
}

}  // namespace

RunConfig parse_config(const json& j) {
  reject_unknown(j,
                 {"preset", "params", "data_csv", "grid", "t_end", "u_max", "targets", "checks", "refine",
                  "exact_gamma", "curve_dx", "seed", "dump_every", "dump_format", "similarity", "picard", "out"},
                 "config");
  RunConfig c;
  if (!j.contains("preset")) throw ConfigError("missing 'preset'");
  c.preset = text(j["preset"], "preset");
  if (j.contains("params")) {
    if (!j["params"].is_object()) throw ConfigError("'params' must be an object");
    for (const auto& [k, v] : j["params"].items()) c.params[k] = number(v, "params." + k);
  }
  if (j.contains("data_csv")) c.data_csv = text(j["data_csv"], "data_csv");
  if (c.preset == "csv" && c.data_csv.empty()) throw ConfigError("preset 'csv' needs 'data_csv'");
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    reject_unknown(g, {"h", "R"}, "grid");
    if (g.contains("h")) c.h = number(g["h"], "grid.h");
    if (g.contains("R")) c.R = number(g["R"], "grid.R");
  }
  positive(c.h, "grid.h");
  positive(c.R, "grid.R");
  if (j.contains("t_end")) c.t_end = number(j["t_end"], "t_end");
  if (j.contains("u_max")) c.u_max = number(j["u_max"], "u_max");
  positive(c.t_end, "t_end");
  positive(c.u_max, "u_max");

  if (j.contains("targets")) {
    const auto& t = j["targets"];
    if (t.is_string()) {
      if (t.get<std::string>() != "auto") throw ConfigError("'targets' must be \"auto\" or a list of numbers");
    } else if (t.is_array()) {
      c.auto_targets = false;
      for (const auto& v : t) c.targets.push_back(number(v, "targets"));
      if (c.targets.empty()) throw ConfigError("'targets' list is empty");
    } else {
      throw ConfigError("'targets' must be \"auto\" or a list of numbers");
    }
  }

  c.checks = check_names();
  if (j.contains("checks")) {
    const auto& k = j["checks"];
    if (k.is_string()) {
      const auto s = k.get<std::string>();
      if (s == "none") c.checks.clear();
      else if (s != "all") throw ConfigError("'checks' must be \"all\", \"none\" or a list of names");
    } else if (k.is_array()) {
      c.checks.clear();
      for (const auto& v : k) {
        const auto name = text(v, "checks");
        if (std::find(check_names().begin(), check_names().end(), name) == check_names().end())
          throw ConfigError("unknown check '" + name + "'");
        c.checks.push_back(name);
      }
    } else {
      throw ConfigError("'checks' must be \"all\", \"none\" or a list of names");
    }
  }

  if (j.contains("refine")) c.refine = boolean(j["refine"], "refine");
  if (j.contains("exact_gamma")) c.exact_gamma = boolean(j["exact_gamma"], "exact_gamma");
  if (j.contains("curve_dx")) c.curve_dx = number(j["curve_dx"], "curve_dx");
  positive(c.curve_dx, "curve_dx");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() || j["seed"].get<std::int64_t>() < 0) throw ConfigError("'seed' must be a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("dump_every")) c.dump_every = integer(j["dump_every"], "dump_every");
  if (c.dump_every < 0) throw ConfigError("'dump_every' must be >= 0");
  if (j.contains("dump_format")) c.dump_format = text(j["dump_format"], "dump_format");
  if (c.dump_format != "csv" && c.dump_format != "binary") throw ConfigError("'dump_format' must be csv or binary");

  if (j.contains("similarity")) {
    const auto& s = j["similarity"];
    reject_unknown(s, {"y_margin", "levels_per_unit_s", "ny", "s_max", "min_gap_cells"}, "similarity");
    if (s.contains("y_margin")) c.similarity.y_margin = number(s["y_margin"], "similarity.y_margin");
    if (s.contains("levels_per_unit_s"))
      c.similarity.levels_per_unit_s = number(s["levels_per_unit_s"], "similarity.levels_per_unit_s");
    if (s.contains("ny")) c.similarity.ny = integer(s["ny"], "similarity.ny");
    if (s.contains("s_max") && !s["s_max"].is_null()) c.similarity.s_max = number(s["s_max"], "similarity.s_max");
    if (s.contains("min_gap_cells")) c.similarity.min_gap_cells = number(s["min_gap_cells"], "similarity.min_gap_cells");
  }
  if (!(c.similarity.y_margin > 0.0 && c.similarity.y_margin < 1.0))
    throw ConfigError("'similarity.y_margin' must lie in (0, 1)");
  positive(c.similarity.levels_per_unit_s, "similarity.levels_per_unit_s");
  positive(c.similarity.min_gap_cells, "similarity.min_gap_cells");
  if (c.similarity.ny < 5) throw ConfigError("'similarity.ny' must be >= 5");

  if (j.contains("picard")) {
    const auto& p = j["picard"];
    reject_unknown(p, {"enabled", "h", "t_local", "R"}, "picard");
    if (p.contains("enabled")) c.picard.enabled = boolean(p["enabled"], "picard.enabled");
    if (p.contains("h")) c.picard.h = number(p["h"], "picard.h");
    if (p.contains("t_local")) c.picard.t_local = number(p["t_local"], "picard.t_local");
    if (p.contains("R")) c.picard.R = number(p["R"], "picard.R");
  }
  positive(c.picard.h, "picard.h");
  positive(c.picard.t_local, "picard.t_local");
  positive(c.picard.R, "picard.R");

  if (j.contains("out")) c.out = text(j["out"], "out");
  if (c.out.empty()) throw ConfigError("'out' must not be empty");
  // Preset name and parameters are validated here so bad configs fail before any artifact.
  if (c.preset != "csv") config_preset(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

json to_json(const RunConfig& c) {
  json j;
  j["preset"] = c.preset;
  j["params"] = json::object();
  for (const auto& [k, v] : c.params) j["params"][k] = v;
  if (!c.data_csv.empty()) j["data_csv"] = c.data_csv;
  j["grid"] = {{"h", c.h}, {"R", c.R}};
  j["t_end"] = c.t_end;
  j["u_max"] = c.u_max;
  if (c.auto_targets) j["targets"] = "auto";
  else j["targets"] = c.targets;
  j["checks"] = c.checks;
  j["refine"] = c.refine;
  j["exact_gamma"] = c.exact_gamma;
  j["curve_dx"] = c.curve_dx;
  j["seed"] = c.seed;
  j["dump_every"] = c.dump_every;
  j["dump_format"] = c.dump_format;
  j["similarity"] = {{"y_margin", c.similarity.y_margin},
                     {"levels_per_unit_s", c.similarity.levels_per_unit_s},
                     {"ny", c.similarity.ny},
                     {"s_max", c.similarity.s_max ? json(*c.similarity.s_max) : json(nullptr)},
                     {"min_gap_cells", c.similarity.min_gap_cells}};
  j["picard"] = {{"enabled", c.picard.enabled}, {"h", c.picard.h}, {"t_local", c.picard.t_local}, {"R", c.picard.R}};
  j["out"] = c.out;
  return j;
}

Preset config_preset(const RunConfig& c, std::optional<double> R) {
  if (c.preset == "csv") return load_csv_preset(c.data_csv);
  try {
    return make_preset(c.preset, c.params, R.value_or(c.R), c.seed);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace blowup
