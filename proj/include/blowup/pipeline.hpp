#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "blowup/config.hpp"
#include "blowup/verify.hpp"

namespace blowup {

struct RunOptions {
  int jobs = 1;
  bool timestamp = true;
  std::optional<std::string> out;  // overrides the config's output directory
  std::ostream* log = nullptr;     // stage progress
};

struct RunResult {
  std::filesystem::path dir;
  nlohmann::json manifest;
  nlohmann::json report;  // array of checks
  int exit_code = 0;      // 0 when every stage ran and no applicable check failed
};

/// argmin of T and the samples nearest the first and third quartiles, over
/// the samples whose cone base [a - T(a), a + T(a)] lies inside the curve's
/// span (all samples when there are none); without duplicates.
std::vector<double> auto_targets(const BlowupCurve& curve);

/// solve, geometry, similarity, picard, checks, cone energy and dumps; writes
/// every artifact plus summary.json and manifest.json. Configuration errors
/// throw before anything is written; stage errors are recorded.
RunResult run(const RunConfig& config, const RunOptions& options);

/// solve, geometry and checks only.
RunResult check(const RunConfig& config, const RunOptions& options);

/// Observed convergence orders between two manifests of the same preset.
nlohmann::json compare(const nlohmann::json& manifest_a, const nlohmann::json& manifest_b);

/// Reads a manifest from a file or from the manifest.json of a directory.
nlohmann::json load_manifest(const std::filesystem::path& path);

nlohmann::json to_json(const BoundCheck& c);

/// Fixed-width table, one line per check.
std::string summary_table(const nlohmann::json& report);

}  // namespace blowup
