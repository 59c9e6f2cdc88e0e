#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "blowup/solver.hpp"

namespace blowup {

/// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite values.
std::string format_double(double v);

void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

/// Comma-separated, header line first, one row per entry.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// Lowercase hex SHA-256 of the file contents.
std::string sha256_file(const std::filesystem::path& path);

struct SvgSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  std::string label;
  bool dashed = false;
};

/// Line plot with axes, tick labels and a legend. The comment line with the
/// timestamp is left out when `timestamp` is empty.
std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                     const std::vector<SvgSeries>& series, const std::string& timestamp = {});

/// Every `every`-th level as rows t,x,u over the valid cells.
void dump_field_csv(const std::filesystem::path& path, const SolveOutcome& outcome, int every);

/// Every `every`-th level, nx doubles per level (level-major, little-endian
/// float64, NaN for invalid cells) in `bin`, with the layout described in
/// the JSON file `header`.
void dump_field_binary(const std::filesystem::path& header, const std::filesystem::path& bin,
                       const SolveOutcome& outcome, int every);

}  // namespace blowup
