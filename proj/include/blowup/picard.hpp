#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "blowup/wavefield.hpp"

namespace blowup {

struct PicardConfig {
  double c0_const = 4.0;
  double c_star = 1.4142135623730951;
  double tol = 1e-12;
  int max_iter = 60;
  int max_halvings = 6;
  /// Use this time instead of local_T (the formula is far too small for
  /// cross-validation on realistic data).
  std::optional<double> t_local;
  /// Only cells of the backward cone from this apex enter the stopping test.
  std::optional<Point> monitor_apex;
};

/// R = 2 C0 (1 + T) |data|_H.
double picard_radius(double norm_h, double T, const PicardConfig& cfg);
/// k = C0 T (1 + T) e^{C* R}.
double picard_contraction_bound(double norm_h, double T, const PicardConfig& cfg);

/// Largest T in (0, 1] with T (1 + T) <= R e^{-C* R} / (2 sqrt 2 C0), by
/// bisection to 1e-12. Zero data gives the cap.
double local_T(double norm_h, const PicardConfig& cfg);

/// Discrete Duhamel map on the light-cone-truncated grid: level n lives on the
/// nodes [n, nx - 1 - n]. Every sum runs over the backward characteristic
/// triangle of its node only, so values inside a cone depend on data in its
/// base alone, bit for bit.
class DuhamelMap {
 public:
  using Trajectory = std::vector<std::vector<double>>;

  DuhamelMap(const InitialData& data, const Grid& grid, int levels);

  int levels() const { return levels_; }
  const Grid& grid() const { return grid_; }
  int first(int n) const { return n; }
  Trajectory zero() const;
  const Trajectory& linear() const { return linear_u_; }

  /// S(t)(u0, u1) + int_0^t S(t - tau)(0, e^{v(tau)}) dtau, first component.
  Trajectory apply(const Trajectory& v) const;
  /// Second component of the same map.
  Trajectory velocity(const Trajectory& v) const;

 private:
  Grid grid_;
  int levels_;
  Trajectory linear_u_, linear_v_;
};

struct PicardResult {
  Grid grid;
  std::vector<StatePair> trajectory;  // level n at t = n h
  double T_local = 0.0;               // n_levels h
  double T_formula = 0.0;             // local_T of the data norm
  int iterations = 0;
  int halvings = 0;
  double contraction_estimate = 0.0;
  double contraction_bound = 0.0;     // C0 T (1 + T) e^{C* R} at T_local
  double radius = 0.0;
  double fixed_point_defect = 0.0;    // |Phi(u) - u|_sup at the returned iterate
  std::vector<double> differences;    // successive sup differences

  /// Position component as a field (cells outside the cone of levels invalid).
  WaveField field() const;
};

/// Picard iteration from v = 0 until the sup difference of successive
/// iterates drops below tol; halves T on failure at most max_halvings times.
PicardResult picard_solve(const InitialData& data, const Grid& grid, const PicardConfig& cfg);

struct ConeSolveResult {
  WaveField field;          // cells outside the cone are invalid
  Point apex;
  double cutoff_outer = 0.0;  // radius beyond which the cutoff vanishes
  int iterations = 0;
};

/// C^2 bump: 1 for |x - x0| <= r, 0 for |x - x0| >= r_outer.
double cutoff(double x, double x0, double r, double r_outer);

/// Solves with data multiplied by the cutoff (1 on the cone base, 0 beyond
/// `outer_factor` times the base half-width) and keeps the backward cone of apex.
ConeSolveResult cone_solve(const InitialData& data, Point apex, double h, PicardConfig cfg,
                           double outer_factor = 3.0);

/// Largest observed |S(t)U|_H / ((1 + t) |U|_H) over random smooth pairs.
double measure_group_constant(int samples, std::uint64_t seed, double h = 0.01);

}  // namespace blowup
