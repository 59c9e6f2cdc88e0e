#include "blowup/wavefield.hpp"

#include <algorithm>
#include <cmath>

namespace blowup {

std::string to_string(Regularity r) {
  return r == Regularity::H1L2 ? "H1L2" : "W1infLinf";
}

namespace {

void require_finite(double v) {
  if (!std::isfinite(v)) throw InvalidArgument("non-finite initial data");
}

// Integral of the piecewise-linear interpolant of f from node 0 to the
// fractional position p (in cells). prefix[k] holds the trapezoid integral
// up to node k.
double partial_integral(std::span<const double> f, std::span<const double> prefix, double h,
                        double p) {
  const int n = static_cast<int>(f.size());
  int k = static_cast<int>(std::floor(p));
  k = std::clamp(k, 0, n - 1);
  const double frac = p - k;
  if (frac <= 0.0 || k == n - 1) return prefix[k];
  const double fk = f[k];
  const double fp = fk + frac * (f[k + 1] - fk);
  return prefix[k] + 0.5 * frac * h * (fk + fp);
}

double interpolate(std::span<const double> f, double p) {
  const int n = static_cast<int>(f.size());
  int k = static_cast<int>(std::floor(p));
  k = std::clamp(k, 0, n - 1);
  const double frac = p - k;
  if (frac <= 0.0 || k == n - 1) return f[k];
  return f[k] + frac * (f[k + 1] - f[k]);
}

std::vector<double> trapezoid_prefix(std::span<const double> f, double h) {
  std::vector<double> prefix(f.size(), 0.0);
  for (std::size_t k = 1; k < f.size(); ++k) prefix[k] = prefix[k - 1] + 0.5 * h * (f[k - 1] + f[k]);
  return prefix;
}

// Sup over windows of `cells` cells of the trapezoid integral of g.
double sup_window_integral(std::span<const double> g, double h, int cells) {
  const auto prefix = trapezoid_prefix(g, h);
  double best = 0.0;
  for (std::size_t k = 0; k + static_cast<std::size_t>(cells) < prefix.size(); ++k)
    best = std::max(best, prefix[k + cells] - prefix[k]);
  return best;
}

}  // namespace

InitialData make_initial_data(Sampler u0, Sampler u1, Regularity regularity, Interval window,
                              double quad_h, std::string label) {
  InitialData data{std::move(u0), std::move(u1), regularity, 0.0, std::move(label)};
  data.h_norm = norm_H(data, window, quad_h);
  if (regularity == Regularity::W1infLinf) {
    const Grid g = Grid::covering(window, quad_h, 1);
    const StatePair s = sample(data, g);
    const auto du = derivative(s.u, s.h);
    double sup = 0.0;
    for (int i = 0; i < s.size(); ++i)
      sup = std::max({sup, std::abs(s.u[i]), std::abs(du[i]), std::abs(s.v[i])});
    require_finite(sup);
  }
  return data;
}

void StatePair::validate() const {
  if (u.size() != v.size()) throw InvalidArgument("state components differ in length");
  if (!(h > 0.0)) throw InvalidArgument("state spacing must be positive");
}

StatePair sample(const InitialData& data, const Grid& grid) {
  StatePair s{grid.x_min, grid.h, std::vector<double>(grid.nx), std::vector<double>(grid.nx)};
  for (int i = 0; i < grid.nx; ++i) {
    const double x = grid.x(i);
    s.u[i] = data.u0(x);
    s.v[i] = data.u1(x);
    require_finite(s.u[i]);
    require_finite(s.v[i]);
  }
  return s;
}

std::vector<double> derivative(std::span<const double> f, double h) {
  const std::size_t n = f.size();
  std::vector<double> d(n, 0.0);
  if (n < 3) throw InvalidArgument("derivative needs at least 3 samples");
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
  return d;
}

double trapezoid(std::span<const double> f, double h) {
  if (f.size() < 2) return 0.0;
  double acc = 0.0;
  for (std::size_t k = 1; k < f.size(); ++k) acc += 0.5 * h * (f[k - 1] + f[k]);
  return acc;
}

double norm_H(const InitialData& data, Interval window, double quad_h) {
  if (window.length() < 1.0 - 1e-12) throw InvalidArgument("norm window shorter than 1");
  const int per_unit = std::max(2, static_cast<int>(std::lround(1.0 / quad_h)));
  const double q = 1.0 / per_unit;
  const int cells = static_cast<int>(std::lround(window.length() / q));
  // One extra node on each side so u0' is centered everywhere in the window.
  std::vector<double> u(cells + 3), v(cells + 3);
  for (int k = 0; k < cells + 3; ++k) {
    const double x = window.lo + (k - 1) * q;
    u[k] = data.u0(x);
    v[k] = data.u1(x);
    require_finite(u[k]);
    require_finite(v[k]);
  }
  std::vector<double> g(cells + 1);
  for (int k = 0; k <= cells; ++k) {
    const double du = (u[k + 2] - u[k]) / (2.0 * q);
    g[k] = u[k + 1] * u[k + 1] + du * du + v[k + 1] * v[k + 1];
  }
  return std::sqrt(sup_window_integral(g, q, per_unit));
}

double norm_H(const StatePair& state, Interval window) {
  state.validate();
  const int lo = std::max(0, static_cast<int>(std::ceil((window.lo - state.x_min) / state.h - 1e-9)));
  const int hi = std::min(state.size() - 1,
                          static_cast<int>(std::floor((window.hi - state.x_min) / state.h + 1e-9)));
  const int per_unit = static_cast<int>(std::lround(1.0 / state.h));
  if (hi - lo < per_unit) throw InvalidArgument("norm window shorter than 1");
  const auto du = derivative(state.u, state.h);
  std::vector<double> g(hi - lo + 1);
  for (int i = lo; i <= hi; ++i) {
    require_finite(state.u[i]);
    require_finite(state.v[i]);
    g[i - lo] = state.u[i] * state.u[i] + du[i] * du[i] + state.v[i] * state.v[i];
  }
  return std::sqrt(sup_window_integral(g, state.h, per_unit));
}

double norm_H(const StatePair& state) {
  return norm_H(state, Interval{state.x_min, state.x(state.size() - 1)});
}

StatePair wave_group(const StatePair& state, double t) {
  state.validate();
  if (t < 0.0) throw InvalidArgument("wave group needs t >= 0");
  const int n = state.size();
  double shift = t / state.h;
  const double rounded = std::round(shift);
  if (std::abs(shift - rounded) < 1e-9) shift = rounded;
  const int first = static_cast<int>(std::ceil(shift));
  const int last = static_cast<int>(std::floor((n - 1) - shift));
  if (last - first + 1 < 2) throw DomainExhausted();

  const auto du = derivative(state.u, state.h);
  const auto prefix = trapezoid_prefix(state.v, state.h);
  StatePair out{state.x(first), state.h, std::vector<double>(last - first + 1),
                std::vector<double>(last - first + 1)};
  for (int i = first; i <= last; ++i) {
    const double pr = i + shift;
    const double pl = i - shift;
    const double integral = partial_integral(state.v, prefix, state.h, pr) -
                            partial_integral(state.v, prefix, state.h, pl);
    out.u[i - first] = 0.5 * (interpolate(state.u, pr) + interpolate(state.u, pl)) + 0.5 * integral;
    out.v[i - first] = 0.5 * (interpolate(du, pr) - interpolate(du, pl)) +
                       0.5 * (interpolate(state.v, pr) + interpolate(state.v, pl));
  }
  return out;
}

double dalembert_position(const InitialData& data, double x, double t, double quad_h) {
  const double a = x - t;
  const double b = x + t;
  double integral = 0.0;
  if (t > 0.0) {
    const int m = std::max(2, static_cast<int>(std::ceil((b - a) / quad_h)));
    const double q = (b - a) / m;
    for (int k = 0; k <= m; ++k) {
      const double w = (k == 0 || k == m) ? 0.5 : 1.0;
      integral += w * data.u1(a + k * q);
    }
    integral *= q;
  }
  return 0.5 * (data.u0(a) + data.u0(b)) + 0.5 * integral;
}

double sobolev_embedding_constant() { return std::sqrt(2.0); }

WaveField::WaveField(Grid grid, double t0) : grid_(grid), t0_(t0) { grid_.validate(); }

std::span<const double> WaveField::level(int n) const {
  return {values_.data() + index(n, 0), static_cast<std::size_t>(grid_.nx)};
}

std::span<const std::uint8_t> WaveField::mask(int n) const {
  return {mask_.data() + index(n, 0), static_cast<std::size_t>(grid_.nx)};
}

void WaveField::push_level(std::vector<double> values, std::vector<std::uint8_t> mask) {
  if (values.size() != static_cast<std::size_t>(grid_.nx) || mask.size() != values.size())
    throw InvalidArgument("level size does not match grid");
  values_.insert(values_.end(), values.begin(), values.end());
  mask_.insert(mask_.end(), mask.begin(), mask.end());
  ++levels_;
}

void WaveField::pop_level() {
  if (levels_ == 0) throw InvalidArgument("no level to pop");
  values_.resize(values_.size() - grid_.nx);
  mask_.resize(mask_.size() - grid_.nx);
  --levels_;
}

std::optional<double> WaveField::u_t(int n, int i) const {
  if (!valid(n, i)) return std::nullopt;
  const double h = grid_.h;
  if (valid(n - 1, i) && valid(n + 1, i)) return (u(n + 1, i) - u(n - 1, i)) / (2.0 * h);
  if (valid(n - 1, i) && valid(n - 2, i))
    return (3.0 * u(n, i) - 4.0 * u(n - 1, i) + u(n - 2, i)) / (2.0 * h);
  if (valid(n + 1, i) && valid(n + 2, i))
    return (-3.0 * u(n, i) + 4.0 * u(n + 1, i) - u(n + 2, i)) / (2.0 * h);
  return std::nullopt;
}

std::optional<double> WaveField::u_x(int n, int i) const {
  if (!valid(n, i)) return std::nullopt;
  const double h = grid_.h;
  if (valid(n, i - 1) && valid(n, i + 1)) return (u(n, i + 1) - u(n, i - 1)) / (2.0 * h);
  if (valid(n, i - 1) && valid(n, i - 2))
    return (3.0 * u(n, i) - 4.0 * u(n, i - 1) + u(n, i - 2)) / (2.0 * h);
  if (valid(n, i + 1) && valid(n, i + 2))
    return (-3.0 * u(n, i) + 4.0 * u(n, i + 1) - u(n, i + 2)) / (2.0 * h);
  return std::nullopt;
}

int WaveField::valid_count(int n) const {
  const auto m = mask(n);
  return static_cast<int>(std::count(m.begin(), m.end(), std::uint8_t{1}));
}

int WaveField::last_valid_level() const {
  for (int n = levels_ - 1; n >= 0; --n)
    if (valid_count(n) > 0) return n;
  return -1;
}

bool WaveField::check_invariants() const {
  for (int n = 0; n < levels_; ++n) {
    for (int i = 0; i < grid_.nx; ++i) {
      if (!valid(n, i)) continue;
      if (!std::isfinite(u(n, i))) return false;
      if (n > 0 && (!valid(n - 1, i - 1) || !valid(n - 1, i + 1))) return false;
    }
  }
  return true;
}

}  // namespace blowup
