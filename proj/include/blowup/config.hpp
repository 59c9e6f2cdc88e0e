#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "blowup/presets.hpp"

namespace blowup {

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct SimilarityConfig {
  double y_margin = 0.02;
  double levels_per_unit_s = 40.0;
  int ny = 201;
  std::optional<double> s_max;  // default: the gap cap
  double min_gap_cells = 10.0;
};

struct PicardRunConfig {
  bool enabled = true;
  double h = 0.01;
  double t_local = 0.25;
  double R = 1.0;  // half-width of the data window
};

/// Run configuration. Every key is optional except "preset"; unknown keys are
/// rejected.
///
///   preset        "ode" | "tilted" | "perturbed-ode" | "random-band-limited" | "constant" | "csv"
///   params        {name: number}          preset parameters
///   data_csv      path                    x,u0,u1 file when preset is "csv"
///   grid          {"h": 1e-3, "R": 2}     spacing and window half-width
///   t_end, u_max  numbers (3, 25)
///   targets       "auto" | [a, ...]
///   checks        "all" | "none" | [name, ...]
///   refine        bool (true)             second run at h/2 for the checks
///   exact_gamma   bool (false)            closed-form curve for analytic presets
///   curve_dx      number (0.01)           curve sample spacing
///   seed          integer (0)
///   dump_every    integer (0 = no dump)
///   dump_format   "csv" | "binary"
///   similarity    {y_margin, levels_per_unit_s, ny, s_max, min_gap_cells}
///   picard        {enabled, h, t_local, R}
///   out           directory
struct RunConfig {
  std::string preset;
  PresetParams params;
  std::string data_csv;
  double h = 1e-3;
  double R = 2.0;
  double t_end = 3.0;
  double u_max = 25.0;
  bool auto_targets = true;
  std::vector<double> targets;
  std::vector<std::string> checks;
  bool refine = true;
  bool exact_gamma = false;
  double curve_dx = 0.01;
  std::uint64_t seed = 0;
  int dump_every = 0;
  std::string dump_format = "csv";
  SimilarityConfig similarity;
  PicardRunConfig picard;
  std::string out = "out";
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
nlohmann::json to_json(const RunConfig& c);

/// Preset of the configuration with window half-width R (or the config's R).
Preset config_preset(const RunConfig& c, std::optional<double> R = std::nullopt);

}  // namespace blowup
