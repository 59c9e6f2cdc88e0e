#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "blowup/grid.hpp"

namespace blowup {

enum class Regularity { H1L2, W1infLinf };

std::string to_string(Regularity r);

using Sampler = std::function<double(double)>;

/// Initial data (u0, u1) given by samplers, with its uniform-local norm.
struct InitialData {
  Sampler u0;
  Sampler u1;
  Regularity regularity = Regularity::H1L2;
  double h_norm = 0.0;
  std::string label;
};

/// Builds InitialData and fills h_norm on `window` with quadrature spacing
/// `quad_h`. For W1infLinf data the sup-norms of u0, u0' and u1 are checked
/// to be finite on the window.
InitialData make_initial_data(Sampler u0, Sampler u1, Regularity regularity, Interval window,
                              double quad_h = 1e-3, std::string label = {});

/// A position/velocity pair sampled on one uniform grid.
struct StatePair {
  double x_min = 0.0;
  double h = 0.0;
  std::vector<double> u;
  std::vector<double> v;

  int size() const { return static_cast<int>(u.size()); }
  double x(int i) const { return x_min + h * i; }
  void validate() const;
};

StatePair sample(const InitialData& data, const Grid& grid);

/// Uniform-local H^1 x L^2 norm: the sup over unit subintervals J of the
/// window of (|u0|^2_{H^1(J)} + |u1|^2_{L^2(J)})^{1/2}, by composite
/// trapezoid on a grid of spacing quad_h. Unit windows start at every grid
/// node, so the sup is over a discrete family.
double norm_H(const InitialData& data, Interval window, double quad_h = 1e-3);
double norm_H(const StatePair& state, Interval window);
double norm_H(const StatePair& state);

/// First derivative of samples: centered in the interior, one-sided
/// second-order at the ends.
std::vector<double> derivative(std::span<const double> f, double h);

/// Composite trapezoid of samples with spacing h over [first, last].
double trapezoid(std::span<const double> f, double h);

/// Free 1D wave group S(t) on sampled data (d'Alembert). The result lives on
/// the nodes x with x +- t inside the input grid; t is rounded to a whole
/// number of cells when it lies within 1e-9 h of one, otherwise the shifted
/// samples are linearly interpolated.
StatePair wave_group(const StatePair& state, double t);

/// Exact d'Alembert pair evaluated from samplers (used as an oracle and for
/// linear parts): u0' and the integral of u1 are taken by `quad_h` quadrature.
double dalembert_position(const InitialData& data, double x, double t, double quad_h);

/// Constant C* with |v|_inf <= C* |v|_{H^1(J)} for every unit interval J.
double sobolev_embedding_constant();

/// Space-time samples of u on the characteristic grid. Level n lives at
/// time t0 + n h. Levels are appended in order and never modified after.
class WaveField {
 public:
  WaveField() = default;
  WaveField(Grid grid, double t0 = 0.0);

  const Grid& grid() const { return grid_; }
  double t0() const { return t0_; }
  int levels() const { return levels_; }
  double t(int n) const { return t0_ + grid_.h * n; }

  double u(int n, int i) const { return values_[index(n, i)]; }
  bool valid(int n, int i) const {
    return n >= 0 && n < levels_ && i >= 0 && i < grid_.nx && mask_[index(n, i)] != 0;
  }
  std::span<const double> level(int n) const;
  std::span<const std::uint8_t> mask(int n) const;

  void push_level(std::vector<double> values, std::vector<std::uint8_t> mask);
  void pop_level();

  /// Centered differences where both neighbours are valid, one-sided
  /// second-order otherwise; empty when no stencil is available.
  std::optional<double> u_t(int n, int i) const;
  std::optional<double> u_x(int n, int i) const;

  /// Number of valid cells on a level.
  int valid_count(int n) const;
  /// Last level with at least one valid cell, or -1.
  int last_valid_level() const;

  /// Checks finiteness of valid values and light-cone causality of the mask.
  bool check_invariants() const;

 private:
  std::size_t index(int n, int i) const {
    return static_cast<std::size_t>(n) * static_cast<std::size_t>(grid_.nx) + static_cast<std::size_t>(i);
  }

  Grid grid_{};
  double t0_ = 0.0;
  int levels_ = 0;
  std::vector<double> values_;
  std::vector<std::uint8_t> mask_;
};

}  // namespace blowup
