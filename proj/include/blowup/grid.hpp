#pragma once

#include <cmath>

#include "blowup/error.hpp"

namespace blowup {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

struct Point {
  double x = 0.0;
  double t = 0.0;
};

/// Uniform characteristic grid. Time and space share the spacing h, so the
/// Courant number is exactly one.
struct Grid {
  double x_min = 0.0;
  double h = 0.0;
  int nx = 0;
  int nt_max = 1;

  double x(int i) const { return x_min + h * i; }
  double x_max() const { return x_min + h * (nx - 1); }
  double t(int n) const { return h * n; }

  /// Nearest grid index to x (not clamped).
  int nearest_index(double xv) const { return static_cast<int>(std::lround((xv - x_min) / h)); }
  int nearest_level(double tv) const { return static_cast<int>(std::lround(tv / h)); }
  bool in_range(int i) const { return i >= 0 && i < nx; }

  void validate() const {
    if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("grid spacing must be positive");
    if (nx < 3) throw InvalidArgument("grid needs at least 3 spatial points");
    if (nt_max < 1) throw InvalidArgument("grid needs at least 1 time level");
  }

  /// Grid starting at window.lo with spacing h; the right end is rounded to
  /// the nearest node.
  static Grid covering(Interval window, double h, int nt_max);
};

inline Grid Grid::covering(Interval window, double h, int nt_max) {
  if (!(h > 0.0)) throw InvalidArgument("grid spacing must be positive");
  if (!(window.hi > window.lo)) throw InvalidArgument("empty window");
  const int cells = static_cast<int>(std::lround(window.length() / h));
  Grid g{window.lo, h, cells + 1, nt_max};
  g.validate();
  return g;
}

}  // namespace blowup
