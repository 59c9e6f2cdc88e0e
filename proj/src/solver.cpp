#include "blowup/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace blowup {

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::reached_t_end:
      return "reached_t_end";
    case StopReason::threshold_exceeded:
      return "threshold_exceeded";
    case StopReason::domain_exhausted:
      return "domain_exhausted";
  }
  return "?";
}

std::string to_string(TruncationBranch b) {
  switch (b) {
    case TruncationBranch::below:
      return "below";
    case TruncationBranch::above:
      return "above";
    case TruncationBranch::indeterminate:
      return "indeterminate";
  }
  return "?";
}

StepReport step_leapfrog(WaveField& field, const SourceTerm& F, int n, double u_max) {
  if (n < 1 || field.levels() != n + 1)
    throw InvalidArgument("step_leapfrog needs levels n-1 and n and nothing beyond");
  const Grid& g = field.grid();
  const double h2 = g.h * g.h;
  const auto cur = field.level(n);
  const auto prev = field.level(n - 1);
  const auto cur_ok = field.mask(n);
  const auto prev_ok = field.mask(n - 1);

  auto live = [&](int i) { return cur_ok[i] != 0 && !(cur[i] > u_max); };

  std::vector<double> next(g.nx, 0.0);
  std::vector<std::uint8_t> ok(g.nx, 0);
  StepReport report;
  for (int i = 1; i + 1 < g.nx; ++i) {
    if (!(live(i - 1) && live(i) && live(i + 1) && prev_ok[i] != 0)) continue;
    const double v = cur[i + 1] + cur[i - 1] - prev[i] + h2 * F(cur[i]);
    if (!std::isfinite(v)) {
      ++report.overflow;
      continue;
    }
    next[i] = v;
    ok[i] = 1;
    ++report.valid;
    if (v > u_max) ++report.crossings;
  }
  field.push_level(std::move(next), std::move(ok));
  return report;
}

WaveField first_level(const InitialData& data, const SourceTerm& F, const Grid& grid) {
  grid.validate();
  const StatePair s = sample(data, grid);
  const double h = grid.h;
  WaveField field(grid, 0.0);
  field.push_level(s.u, std::vector<std::uint8_t>(grid.nx, 1));
  std::vector<double> one(grid.nx, 0.0);
  std::vector<std::uint8_t> ok(grid.nx, 0);
  for (int i = 1; i + 1 < grid.nx; ++i) {
    one[i] = 0.5 * (s.u[i + 1] + s.u[i - 1]) + h * s.v[i] + 0.5 * h * h * F(s.u[i]);
    ok[i] = std::isfinite(one[i]) ? 1 : 0;
  }
  field.push_level(std::move(one), std::move(ok));
  return field;
}

SolveOutcome solve(const InitialData& data, const SourceTerm& F, const Grid& grid, double u_max,
                   double t_end, SolveOptions options) {
  grid.validate();
  if (!(t_end > 0.0)) throw InvalidArgument("t_end must be positive");
  SolveOutcome out;
  out.u_max = u_max;
  out.field = first_level(data, F, grid);
  out.crossing_level.assign(grid.nx, -1);

  const auto level0 = out.field.level(0);
  const double sup0 = *std::max_element(level0.begin(), level0.end());
  if (!(u_max > sup0 + 1.0)) throw InvalidArgument("u_max must exceed sup u0 + 1");

  auto record = [&](int n) {
    bool any = false;
    for (int i = 0; i < grid.nx; ++i) {
      if (out.crossing_level[i] < 0 && out.blown(n, i)) {
        out.crossing_level[i] = n;
        any = true;
      }
    }
    return any;
  };

  const int last = std::min(grid.nt_max - 1, static_cast<int>(std::lround(t_end / grid.h)));
  out.max_level = 1;
  bool crossed = record(1);
  if (last <= 1) {
    out.stopped_reason = StopReason::reached_t_end;
    return out;
  }
  if (crossed && options.stop_at_first_crossing) {
    out.stopped_reason = StopReason::threshold_exceeded;
    return out;
  }

  for (int n = 1; n < last; ++n) {
    const StepReport r = step_leapfrog(out.field, F, n, u_max);
    if (r.overflow > 0) {
      out.field.pop_level();
      auto partial = std::make_shared<SolveOutcome>(std::move(out));
      partial->max_level = n;
      throw NumericalBlowThrough(n, std::move(partial));
    }
    if (r.valid == 0) {
      // Nothing left to advance: the previous level is the last one.
      const bool last_had_crossing = std::any_of(
          out.crossing_level.begin(), out.crossing_level.end(), [&](int c) { return c == n; });
      out.stopped_reason =
          last_had_crossing ? StopReason::threshold_exceeded : StopReason::domain_exhausted;
      out.max_level = n;
      return out;
    }
    out.max_level = n + 1;
    crossed = record(n + 1);
    if (crossed && options.stop_at_first_crossing) {
      out.stopped_reason = StopReason::threshold_exceeded;
      return out;
    }
  }
  out.stopped_reason = StopReason::reached_t_end;
  return out;
}

ConeMonotonicity check_cone_monotonicity(const SolveOutcome& outcome, Point apex, double R) {
  const WaveField& f = outcome.field;
  const Grid& g = f.grid();
  const int n0 = g.nearest_level(apex.t - f.t0());
  const int i0 = g.nearest_index(apex.x);
  if (n0 < 0 || n0 > outcome.max_level || !f.valid(n0, i0))
    throw InvalidArgument("apex is not a valid grid point");
  const double x0 = g.x(i0);
  const double t0 = f.t(n0);
  if (std::abs(x0) > R - t0 + 1e-12) throw InvalidArgument("apex outside D_R");

  ConeMonotonicity r;
  r.apex = {x0, t0};
  r.apex_value = f.u(n0, i0);
  double c_minus = -std::numeric_limits<double>::infinity();
  for (int n = 0; n <= n0; ++n) {
    const int w = n0 - n;
    for (int i = std::max(0, i0 - w); i <= std::min(g.nx - 1, i0 + w); ++i) {
      if (!f.valid(n, i)) continue;
      c_minus = std::max(c_minus, f.u(n, i) - r.apex_value);
      ++r.cells_minus;
    }
  }
  double c_plus = -std::numeric_limits<double>::infinity();
  for (int n = n0; n <= outcome.max_level; ++n) {
    const int w = n - n0;
    const double t = f.t(n);
    for (int i = std::max(0, i0 - w); i <= std::min(g.nx - 1, i0 + w); ++i) {
      if (!f.valid(n, i) || std::abs(g.x(i)) > R - t + 1e-12) continue;
      c_plus = std::max(c_plus, r.apex_value - f.u(n, i));
      ++r.cells_plus;
    }
  }
  r.c_minus = c_minus;
  r.c_plus = c_plus;
  return r;
}

ConeSweep cone_monotonicity_sweep(const SolveOutcome& outcome, const std::vector<Point>& apexes,
                                  double R) {
  ConeSweep sweep;
  for (const Point& p : apexes) {
    auto r = check_cone_monotonicity(outcome, p, R);
    sweep.c_minus = std::max(sweep.c_minus, r.c_minus);
    sweep.c_plus = std::max(sweep.c_plus, r.c_plus);
    sweep.points.push_back(r);
  }
  return sweep;
}

TruncationLimit truncation_limit(const InitialData& data, const Grid& grid, Point point,
                                 const std::vector<int>& levels, double blowup_time, double u_max) {
  if (levels.empty()) throw InvalidArgument("truncation_limit needs at least one level");
  const int n0 = grid.nearest_level(point.t);
  const int i0 = grid.nearest_index(point.x);
  if (!grid.in_range(i0) || n0 < 0 || n0 >= grid.nt_max) throw InvalidArgument("point outside grid");

  TruncationLimit r;
  r.point = {grid.x(i0), grid.t(n0)};
  r.levels = levels;
  std::sort(r.levels.begin(), r.levels.end());
  if (std::abs(r.point.t - blowup_time) <= grid.h)
    r.branch = TruncationBranch::indeterminate;
  else
    r.branch = r.point.t < blowup_time ? TruncationBranch::below : TruncationBranch::above;

  const double t_end = r.point.t;
  for (int n : r.levels) {
    // Truncated sources are bounded, so no threshold is needed.
    const auto out = solve(data, SourceTerm::truncated(n), grid,
                           std::numeric_limits<double>::infinity(), t_end);
    if (!out.field.valid(n0, i0)) throw DomainExhausted("point not reached by the truncated solve");
    r.values.push_back(out.field.u(n0, i0));
  }
  r.monotone = std::is_sorted(r.values.begin(), r.values.end());

  if (r.branch == TruncationBranch::below) {
    const auto ref = solve(data, SourceTerm::exponential(), grid, u_max, t_end);
    if (!ref.field.valid(n0, i0) || ref.blown(n0, i0))
      throw DomainExhausted("untruncated solve does not reach the point");
    r.reference = ref.field.u(n0, i0);
    r.final_error = std::abs(r.values.back() - r.reference);
  }
  return r;
}

}  // namespace blowup
