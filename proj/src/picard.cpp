#include "blowup/picard.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace blowup {

double picard_radius(double norm_h, double T, const PicardConfig& cfg) {
  return 2.0 * cfg.c0_const * (1.0 + T) * norm_h;
}

double picard_contraction_bound(double norm_h, double T, const PicardConfig& cfg) {
  return cfg.c0_const * T * (1.0 + T) * std::exp(cfg.c_star * picard_radius(norm_h, T, cfg));
}

double local_T(double norm_h, const PicardConfig& cfg) {
  if (!(norm_h >= 0.0)) throw InvalidArgument("norm must be >= 0");
  if (norm_h == 0.0) return 1.0;
  // Any upper bound of the norm closes the fixed-point argument, so R is never
  // taken below the maximiser 1/C* of R e^{-C* R}; this keeps T monotone in
  // the norm.
  auto gap = [&](double T) {
    const double R = std::max(picard_radius(norm_h, T, cfg), 1.0 / cfg.c_star);
    return R * std::exp(-cfg.c_star * R) / (2.0 * std::sqrt(2.0) * cfg.c0_const) - T * (1.0 + T);
  };
  if (gap(1.0) >= 0.0) return 1.0;
  // Relative tolerance: for large norms T falls far below 1e-12.
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    (gap(mid) >= 0.0 ? lo : hi) = mid;
  }
  return lo;
}

namespace {

// Trapezoid of f over nodes [a, b] with spacing h, summed left to right.
double trap(const std::vector<double>& f, int offset, int a, int b, double h) {
  if (b <= a) return 0.0;
  double s = 0.5 * (f[a - offset] + f[b - offset]);
  for (int j = a + 1; j < b; ++j) s += f[j - offset];
  return s * h;
}

}  // namespace

DuhamelMap::DuhamelMap(const InitialData& data, const Grid& grid, int levels)
    : grid_(grid), levels_(levels) {
  grid_.validate();
  if (levels < 0 || grid_.nx - 1 - levels < levels) throw DomainExhausted();
  const StatePair s = sample(data, grid_);
  const auto du = derivative(s.u, grid_.h);
  const double h = grid_.h;
  for (int n = 0; n <= levels_; ++n) {
    std::vector<double> u, v;
    for (int i = n; i <= grid_.nx - 1 - n; ++i) {
      u.push_back(0.5 * (s.u[i + n] + s.u[i - n]) + 0.5 * trap(s.v, 0, i - n, i + n, h));
      v.push_back(0.5 * (du[i + n] - du[i - n]) + 0.5 * (s.v[i + n] + s.v[i - n]));
    }
    linear_u_.push_back(std::move(u));
    linear_v_.push_back(std::move(v));
  }
}

DuhamelMap::Trajectory DuhamelMap::zero() const {
  Trajectory z;
  for (const auto& level : linear_u_) z.emplace_back(level.size(), 0.0);
  return z;
}

namespace {

DuhamelMap::Trajectory exponentiate(const DuhamelMap::Trajectory& v) {
  DuhamelMap::Trajectory e = v;
  for (auto& level : e)
    for (double& x : level) x = std::exp(x);
  return e;
}

}  // namespace

DuhamelMap::Trajectory DuhamelMap::apply(const Trajectory& v) const {
  const double h = grid_.h;
  const Trajectory e = exponentiate(v);
  Trajectory out = linear_u_;
  for (int n = 1; n <= levels_; ++n) {
    for (int i = n; i <= grid_.nx - 1 - n; ++i) {
      double src = 0.0;
      for (int m = 0; m < n; ++m) {
        const int w = n - m;
        const double inner = trap(e[m], m, i - w, i + w, h);
        src += (m == 0 ? 0.5 : 1.0) * inner;
      }
      out[n][i - n] += 0.5 * h * src;
    }
  }
  return out;
}

DuhamelMap::Trajectory DuhamelMap::velocity(const Trajectory& v) const {
  const double h = grid_.h;
  const Trajectory e = exponentiate(v);
  Trajectory out = linear_v_;
  for (int n = 1; n <= levels_; ++n) {
    for (int i = n; i <= grid_.nx - 1 - n; ++i) {
      double src = 0.0;
      for (int m = 0; m <= n; ++m) {
        const int w = n - m;
        const double weight = (m == 0 || m == n) ? 0.5 : 1.0;
        src += weight * (e[m][i + w - m] + e[m][i - w - m]);
      }
      out[n][i - n] += 0.5 * h * src;
    }
  }
  return out;
}

WaveField PicardResult::field() const {
  WaveField f(grid);
  for (int n = 0; n < static_cast<int>(trajectory.size()); ++n) {
    std::vector<double> values(grid.nx, 0.0);
    std::vector<std::uint8_t> mask(grid.nx, 0);
    for (int i = 0; i < trajectory[n].size(); ++i) {
      values[i + n] = trajectory[n].u[i];
      mask[i + n] = 1;
    }
    f.push_level(std::move(values), std::move(mask));
  }
  return f;
}

namespace {

double sup_difference(const DuhamelMap::Trajectory& a, const DuhamelMap::Trajectory& b,
                      const Grid& g, const std::optional<Point>& apex) {
  double d = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    for (std::size_t q = 0; q < a[n].size(); ++q) {
      if (apex) {
        const double x = g.x(static_cast<int>(q + n));
        if (std::abs(x - apex->x) > apex->t - g.t(static_cast<int>(n)) + 1e-12) continue;
      }
      const double diff = std::abs(a[n][q] - b[n][q]);
      if (!std::isfinite(diff)) return std::numeric_limits<double>::infinity();
      d = std::max(d, diff);
    }
  }
  return d;
}

}  // namespace

PicardResult picard_solve(const InitialData& data, const Grid& grid, const PicardConfig& cfg) {
  if (!(cfg.tol > 0.0)) throw InvalidArgument("picard tolerance must be positive");
  if (cfg.max_iter < 1) throw InvalidArgument("picard needs max_iter >= 1");
  grid.validate();

  PicardResult res;
  res.grid = grid;
  res.T_formula = local_T(data.h_norm, cfg);
  double T = cfg.t_local.value_or(res.T_formula);
  if (!(T > 0.0)) throw InvalidArgument("local time must be positive");

  for (res.halvings = 0; res.halvings <= cfg.max_halvings; ++res.halvings, T *= 0.5) {
    const int levels = static_cast<int>(std::floor(T / grid.h + 1e-9));
    if (levels < 1) break;
    const DuhamelMap map(data, grid, levels);
    auto cur = map.zero();
    res.differences.clear();
    res.contraction_estimate = 0.0;
    bool converged = false;
    for (int it = 1; it <= cfg.max_iter; ++it) {
      auto next = map.apply(cur);
      const double d = sup_difference(next, cur, grid, cfg.monitor_apex);
      cur = std::move(next);
      res.differences.push_back(d);
      res.iterations = it;
      if (!std::isfinite(d)) break;
      const std::size_t k = res.differences.size();
      if (k >= 2 && res.differences[k - 2] > 100.0 * cfg.tol)
        res.contraction_estimate = std::max(res.contraction_estimate, d / res.differences[k - 2]);
      if (d < cfg.tol) {
        converged = true;
        break;
      }
    }
    if (!converged || !(res.contraction_estimate < 1.0)) continue;

    res.fixed_point_defect = sup_difference(map.apply(cur), cur, grid, cfg.monitor_apex);
    const auto vel = map.velocity(cur);
    for (int n = 0; n <= levels; ++n)
      res.trajectory.push_back({grid.x(n), grid.h, cur[n], vel[n]});
    res.T_local = levels * grid.h;
    res.radius = picard_radius(data.h_norm, res.T_local, cfg);
    res.contraction_bound = picard_contraction_bound(data.h_norm, res.T_local, cfg);
    return res;
  }
  throw Error("no contraction at this T");
}

double cutoff(double x, double x0, double r, double r_outer) {
  const double d = std::abs(x - x0);
  if (d <= r) return 1.0;
  if (d >= r_outer) return 0.0;
  const double s = (d - r) / (r_outer - r);
  return 1.0 - s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

ConeSolveResult cone_solve(const InitialData& data, Point apex, double h, PicardConfig cfg,
                           double outer_factor) {
  if (!(apex.t > 0.0)) throw InvalidArgument("cone apex needs t > 0");
  if (!(outer_factor > 1.0)) throw InvalidArgument("cutoff must extend beyond the cone base");
  const int levels = static_cast<int>(std::lround(apex.t / h));
  if (levels < 1) throw InvalidArgument("cone apex below one time step");
  ConeSolveResult res;
  res.apex = {apex.x, levels * h};
  const double r = res.apex.t;
  const int outer_cells = static_cast<int>(std::ceil(outer_factor * levels));
  res.cutoff_outer = outer_cells * h;

  const double x0 = res.apex.x, ro = res.cutoff_outer;
  auto u0 = [data, x0, r, ro](double x) { return cutoff(x, x0, r, ro) * data.u0(x); };
  auto u1 = [data, x0, r, ro](double x) { return cutoff(x, x0, r, ro) * data.u1(x); };
  const Interval window{x0 - ro, x0 + ro};
  const InitialData local = make_initial_data(u0, u1, data.regularity, window, h, data.label);

  const Grid grid = Grid::covering(window, h, levels + 1);
  cfg.t_local = r;
  cfg.monitor_apex = res.apex;
  const PicardResult pr = picard_solve(local, grid, cfg);
  if (pr.T_local < r - 1e-12) throw Error("picard solve did not reach the apex");
  res.iterations = pr.iterations;

  res.field = WaveField(grid);
  for (int n = 0; n <= levels; ++n) {
    std::vector<double> values(grid.nx, 0.0);
    std::vector<std::uint8_t> mask(grid.nx, 0);
    for (int i = 0; i < grid.nx; ++i) {
      if (std::abs(grid.x(i) - x0) > r - grid.t(n) + 1e-12) continue;
      values[i] = pr.trajectory[n].u[i - n];
      mask[i] = 1;
    }
    res.field.push_level(std::move(values), std::move(mask));
  }
  return res;
}

double measure_group_constant(int samples, std::uint64_t seed, double h) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  const double lo = -6.0, hi = 6.0;
  const int n = static_cast<int>(std::lround((hi - lo) / h)) + 1;
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    StatePair s{lo, h, std::vector<double>(n), std::vector<double>(n)};
    for (int m = 1; m <= 5; ++m) {
      const double a = c(rng) / m, b = c(rng) / m;
      const double p = std::numbers::pi * c(rng), q = std::numbers::pi * c(rng);
      for (int i = 0; i < n; ++i) {
        s.u[i] += a * std::cos(m * s.x(i) + p);
        s.v[i] += b * std::cos(m * s.x(i) + q);
      }
    }
    const double base = norm_H(s);
    for (double t : {0.5, 1.0, 2.0}) worst = std::max(worst, norm_H(wave_group(s, t)) / ((1.0 + t) * base));
  }
  return worst;
}

}  // namespace blowup
