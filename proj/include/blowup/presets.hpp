#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "blowup/wavefield.hpp"

namespace blowup {

/// Closed-form solution of the exponential wave equation, when one is known.
struct ExactSolution {
  std::function<double(double, double)> u;         // u(x, t)
  std::function<double(double)> blowup_time;       // T(x)
};

/// Named initial data plus the spatial window it is meant to be solved on.
struct Preset {
  std::string name;
  InitialData data;
  Interval window;
  std::optional<ExactSolution> exact;
};

using PresetParams = std::map<std::string, double>;

/// Presets:
///  - "ode"          u0 = log(2/T^2), u1 = 2/T               (param T, default 1)
///  - "tilted"       u0 = log(2(1-k^2)/(T+k x)^2), u1 = 2/(T+k x)
///                   (params kappa default 0.5, T default 1)
///  - "perturbed-ode" u0 = log 2 + amplitude cos(pi x), u1 = 2 (amplitude 0.3)
///  - "random-band-limited" random trigonometric polynomial (modes, amplitude, offset)
///  - "constant"     u0 = value, u1 = velocity
/// `R` is the half-width of the default window; tilted data uses an
/// asymmetric window that stays clear of its singularity at x = -T/kappa.
Preset make_preset(const std::string& name, const PresetParams& params, double R = 2.0,
                   std::uint64_t seed = 0);

/// Initial data read from a CSV file with header x,u0,u1. Samples are
/// linearly interpolated; sampling outside the file's range is an error.
Preset load_csv_preset(const std::string& path);

}  // namespace blowup
