#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "blowup/solver.hpp"

namespace blowup {

/// u, u_t, u_x at an arbitrary point, bilinear in the surrounding cell.
struct FieldSample {
  double u = 0.0;
  double ut = 0.0;
  double ux = 0.0;
};

/// Empty when a corner of the cell is invalid, blown, or lacks derivatives.
std::optional<FieldSample> sample_field(const SolveOutcome& outcome, Point p);

struct SimilarityOptions {
  double y_margin = 0.02;
  double levels_per_unit_s = 40.0;
  int ny = 201;
  /// First s level; NaN means t = 0, i.e. s = -log T.
  double s_min = std::numeric_limits<double>::quiet_NaN();
  /// Last requested s level; capped where e^{-s} < min_gap_cells h.
  double s_max = std::numeric_limits<double>::infinity();
  double min_gap_cells = 2.0;
};

/// w(y, s) = u(a + y e^{-s}, T - e^{-s}) - 2 s with its first derivatives,
/// stored s-major.
struct SimilarityFrame {
  double a = 0.0;
  double T = 0.0;
  double y_margin = 0.0;
  bool truncated = false;
  std::vector<double> s_grid;
  std::vector<double> y_grid;
  std::vector<double> w, ws, wy;

  int ns() const { return static_cast<int>(s_grid.size()); }
  int ny() const { return static_cast<int>(y_grid.size()); }
  std::size_t at(int k, int j) const { return static_cast<std::size_t>(k) * y_grid.size() + j; }
  double W(int k, int j) const { return w[at(k, j)]; }
  double Ws(int k, int j) const { return ws[at(k, j)]; }
  double Wy(int k, int j) const { return wy[at(k, j)]; }
  /// u recovered from the frame: w - 2 log(T - t).
  double reconstruct_u(int k, int j) const { return W(k, j) + 2.0 * s_grid[k]; }
  Point physical(int k, int j) const;

  /// Frame from closed forms (oracles and synthetic profiles).
  static SimilarityFrame from_function(const std::function<double(double, double)>& w,
                                       const std::function<double(double, double)>& ws,
                                       const std::function<double(double, double)>& wy,
                                       std::vector<double> s_grid, std::vector<double> y_grid);
};

SimilarityFrame to_similarity(const SolveOutcome& outcome, double a, double T,
                              SimilarityOptions opt = {});

/// Uniform grid of n points on [lo, hi].
std::vector<double> uniform_grid(double lo, double hi, int n);

/// max over interior (y, s) nodes of
///   |w_ss - ((1 - y^2) w_y)_y - e^w + 2 + w_s + 2 y w_ys|,
/// second derivatives by centered differences of the stored first derivatives.
double equation_residual(const SimilarityFrame& frame);

/// Lyapunov functional on the frame's y interval at level k.
double lyapunov_level(const SimilarityFrame& frame, int k);
/// Same with every other y node (for the quadrature error estimate).
double lyapunov_level_coarse(const SimilarityFrame& frame, int k);
/// Linear interpolation in s between levels.
double lyapunov(const SimilarityFrame& frame, double s);

/// Boundary dissipation on [-L, L], L = max |y| of the frame:
///   L (w_s(L)^2 + w_s(-L)^2) - (1 - L^2) (w_s w_y |_{L} - w_s w_y |_{-L}),
/// so that dE/ds = -flux exactly for solutions.
double boundary_flux(const SimilarityFrame& frame, int k);

struct EnergyTrace {
  double margin = 0.0;
  std::vector<double> s;
  std::vector<double> E;
  std::vector<double> flux;
  std::vector<double> residual;  // |E(s_k) - E(s_0) + int flux| by trapezoid in s
  std::vector<double> E_coarse;  // E with every other y node
};

EnergyTrace energy_trace(const SimilarityFrame& frame);

/// |E(s2) - E(s1) + int_{s1}^{s2} flux ds| over the trace levels nearest s1, s2.
double dissipation_identity(const EnergyTrace& trace, double s1, double s2);

/// Richardson estimate of the quadrature error of dissipation_identity on
/// [s1, s2]: y rule at both ends plus the s rule for the flux integral.
double dissipation_quadrature_error(const EnergyTrace& trace, double s1, double s2);

/// Largest increase of E between any two levels (0 when nonincreasing).
double max_energy_increase(const EnergyTrace& trace);

struct FrameBounds {
  double sup_w_plus_energy = 0.0;  // max over s of sup |w| + int (w_s^2 + w_y^2) dy
  double sup_upper = 0.0;          // max of w + 2 log(1 - |y|)
};

FrameBounds frame_bounds(const SimilarityFrame& frame);

}  // namespace blowup
