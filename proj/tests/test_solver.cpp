#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "blowup/presets.hpp"
#include "blowup/solver.hpp"

using namespace blowup;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Grid grid_for(Interval w, double h, double t_end) {
  return Grid::covering(w, h, static_cast<int>(std::lround(t_end / h)) + 2);
}

double ode_exact(double t) { return std::log(2.0 / ((1.0 - t) * (1.0 - t))); }

double value_at(const SolveOutcome& out, double x, double t) {
  const auto& g = out.field.grid();
  return out.field.u(g.nearest_level(t), g.nearest_index(x));
}

}  // namespace

TEST(Truncation, MatchesExponentialBelowAndPlateauAbove) {
  const Truncation f(5);
  EXPECT_DOUBLE_EQ(f(4.2), std::exp(4.2));
  EXPECT_DOUBLE_EQ(f(5.0), std::exp(5.0));
  EXPECT_DOUBLE_EQ(f(6.0), std::exp(5.0));
  EXPECT_DOUBLE_EQ(f(60.0), std::exp(5.0));
  EXPECT_THROW(Truncation(-1), InvalidArgument);
  const auto s = SourceTerm::truncated(5);
  EXPECT_DOUBLE_EQ(s(5.5), f(5.5));
}

TEST(Truncation, MonotoneAndBoundedOnSweep) {
  for (int n : {0, 3, 8}) {
    const Truncation f(n);
    double prev = -kInf;
    for (int k = 0; k <= 100000; ++k) {
      const double u = -20.0 + 40.0 * k / 100000.0;
      const double v = f(u);
      ASSERT_GE(v, prev);
      ASSERT_LE(v, std::min(std::exp(u), std::exp(n + 1.0)) * (1 + 1e-15));
      prev = v;
    }
  }
}

TEST(Leapfrog, LinearDataIsExact) {
  const auto data = make_initial_data([](double x) { return x; }, [](double) { return 0.0; },
                                      Regularity::H1L2, {-1, 1});
  const Grid g = Grid::covering({-1, 1}, 0.1, 4);
  auto f = first_level(data, SourceTerm::zero(), g);
  step_leapfrog(f, SourceTerm::zero(), 1, kInf);
  for (int i = 2; i < g.nx - 2; ++i) EXPECT_NEAR(f.u(2, i), g.x(i), 1e-14);
  EXPECT_FALSE(f.valid(2, 1));
  EXPECT_TRUE(f.valid(2, 2));
}

TEST(Leapfrog, StepNeedsExactlyTwoLevels) {
  const auto data = make_initial_data([](double) { return 0.0; }, [](double) { return 0.0; },
                                      Regularity::H1L2, {-1, 1});
  auto f = first_level(data, SourceTerm::zero(), Grid::covering({-1, 1}, 0.1, 4));
  EXPECT_THROW(step_leapfrog(f, SourceTerm::zero(), 2, kInf), InvalidArgument);
}

TEST(FirstLevel, ZeroDataWithExponentialSource) {
  const double h = 0.01;
  const auto data = make_initial_data([](double) { return 0.0; }, [](double) { return 0.0; },
                                      Regularity::H1L2, {-1, 1});
  const auto f = first_level(data, SourceTerm::exponential(), Grid::covering({-1, 1}, h, 2));
  EXPECT_NEAR(f.u(1, 50), h * h / 2, 1e-18);
}

TEST(FirstLevel, LinearDataIsExact) {
  const double h = 0.01;
  const auto data = make_initial_data([](double x) { return x; }, [](double) { return 1.0; },
                                      Regularity::H1L2, {-1, 1});
  const Grid g = Grid::covering({-1, 1}, h, 2);
  const auto f = first_level(data, SourceTerm::zero(), g);
  for (int i = 1; i < g.nx - 1; ++i) EXPECT_NEAR(f.u(1, i), g.x(i) + h, 1e-14);
}

TEST(FirstLevel, OdeStartIsThirdOrder) {
  const auto p = make_preset("ode", {}, 1.0);
  double err[2];
  int k = 0;
  for (double h : {0.02, 0.01}) {
    const auto f = first_level(p.data, SourceTerm::exponential(), Grid::covering(p.window, h, 2));
    err[k++] = std::abs(f.u(1, 10) - ode_exact(h));
  }
  EXPECT_GT(std::log2(err[0] / err[1]), 2.8);
}

TEST(Solve, OdeSolutionSecondOrderAtHalfTime) {
  const auto p = make_preset("ode", {}, 1.0);
  double err[2];
  int k = 0;
  for (double h : {1e-2, 5e-3}) {
    const auto out = solve(p.data, SourceTerm::exponential(), grid_for(p.window, h, 0.5), 25.0, 0.5);
    EXPECT_EQ(out.stopped_reason, StopReason::reached_t_end);
    const double u = value_at(out, 0.0, 0.5);
    err[k] = std::abs(u - std::log(8.0));
    EXPECT_LE(err[k], 5 * h * h) << "h = " << h;
    ++k;
  }
  EXPECT_GT(std::log2(err[0] / err[1]), 1.8);
}

TEST(Solve, TruncatedSourceAboveLevelIsLinearWavePlusConstantSource) {
  // Data above 6 everywhere: F_5 is the constant e^5 along the whole run.
  const auto data = make_initial_data([](double x) { return 7.0 + 0.5 * std::sin(2 * x); },
                                      [](double x) { return std::cos(x); }, Regularity::H1L2, {-3, 3});
  const double h = 0.01, t = 0.8;
  const auto out = solve(data, SourceTerm::truncated(5), grid_for({-3, 3}, h, t), kInf, t);
  const auto& g = out.field.grid();
  const int n = g.nearest_level(t);
  const auto lin = wave_group(sample(data, g), g.t(n));
  double err = 0.0;
  for (int j = 0; j < lin.size(); ++j) {
    const int i = g.nearest_index(lin.x(j));
    ASSERT_TRUE(out.field.valid(n, i));
    err = std::max(err, std::abs(out.field.u(n, i) - (lin.u[j] + std::exp(5.0) * g.t(n) * g.t(n) / 2)));
  }
  EXPECT_LT(err, 1e-3);
}

TEST(Solve, TiltedCrossingTimesFollowTheLine) {
  const double kappa = 0.5, h = 1e-3;
  const auto p = make_preset("tilted", {{"kappa", kappa}});
  const auto out = solve(p.data, SourceTerm::exponential(), grid_for(p.window, h, 2.0), 25.0, 2.0);
  EXPECT_EQ(out.stopped_reason, StopReason::threshold_exceeded);
  const auto& g = out.field.grid();
  for (double x : {-0.5, -0.2, 0.0, 0.3, 0.5}) {
    const int i = g.nearest_index(x);
    ASSERT_GE(out.crossing_level[i], 0) << "x = " << x;
    EXPECT_NEAR(out.crossing_time(i), 1.0 + kappa * g.x(i), 5e-3) << "x = " << x;
  }
  EXPECT_TRUE(out.field.check_invariants());
  // Crossing values are kept on the last level.
  bool above = false;
  for (int i = 0; i < g.nx; ++i) above |= out.blown(out.max_level, i);
  EXPECT_TRUE(above);
}

TEST(Solve, StopAtFirstCrossing) {
  const auto p = make_preset("ode", {}, 2.0);
  const auto out = solve(p.data, SourceTerm::exponential(), grid_for(p.window, 0.01, 2.0), 25.0, 2.0,
                         {.stop_at_first_crossing = true});
  EXPECT_EQ(out.stopped_reason, StopReason::threshold_exceeded);
  EXPECT_NEAR(out.field.t(out.max_level), 1.0, 0.02);
}

TEST(Solve, LinearRunExhaustsDomain) {
  const auto data = make_initial_data([](double) { return 0.0; }, [](double) { return 0.0; },
                                      Regularity::H1L2, {-1, 1});
  const auto out = solve(data, SourceTerm::zero(), grid_for({-1, 1}, 0.1, 5), 25.0, 5.0);
  EXPECT_EQ(out.stopped_reason, StopReason::domain_exhausted);
  EXPECT_EQ(out.max_level, 10);
}

TEST(Solve, TruncatedOdeIsGlobalAndBounded) {
  const auto p = make_preset("ode", {}, 4.0);
  const double t_end = 3.0, h = 0.01;
  const auto out = solve(p.data, SourceTerm::truncated(3), grid_for(p.window, h, t_end), kInf, t_end);
  EXPECT_EQ(out.stopped_reason, StopReason::reached_t_end);
  const auto& g = out.field.grid();
  for (int n = 0; n <= out.max_level; n += 10) {
    const double t = g.t(n);
    const double bound = std::log(2.0) + 2.0 * t + t * t * std::exp(4.0) / 2.0;
    for (int i = 0; i < g.nx; ++i)
      if (out.field.valid(n, i)) ASSERT_LE(out.field.u(n, i), bound + 1e-9);
  }
}

TEST(Solve, BlowThroughCarriesLastLevel) {
  const auto p = make_preset("ode", {}, 2.0);
  try {
    solve(p.data, SourceTerm::exponential(), grid_for(p.window, 0.05, 2.0), 1e300, 2.0);
    FAIL() << "expected blow-through";
  } catch (const NumericalBlowThrough& e) {
    EXPECT_STREQ(e.what(), "numerical blow-through");
    EXPECT_GT(e.last_level(), 10);
    EXPECT_EQ(e.partial().field.levels(), e.last_level() + 1);
  }
}

TEST(Solve, RejectsLowThreshold) {
  const auto p = make_preset("ode", {}, 1.0);
  EXPECT_THROW(solve(p.data, SourceTerm::exponential(), grid_for(p.window, 0.05, 1.0), 1.0, 1.0),
               InvalidArgument);
}

TEST(SolveProperties, TruncatedNeverExceedsExponential) {
  const auto p = make_preset("perturbed-ode", {}, 2.0);
  const double h = 0.005, t_end = 1.5;
  const Grid g = grid_for(p.window, h, t_end);
  const auto full = solve(p.data, SourceTerm::exponential(), g, 25.0, t_end);
  for (int n : {1, 2, 4}) {
    const auto trunc = solve(p.data, SourceTerm::truncated(n), g, kInf, t_end);
    for (int k = 0; k <= full.max_level; ++k)
      for (int i = 0; i < g.nx; ++i)
        if (full.field.valid(k, i) && trunc.field.valid(k, i))
          ASSERT_LE(trunc.field.u(k, i), full.field.u(k, i)) << "n=" << n << " level " << k;
  }
}

TEST(SolveProperties, TruncatedDominatesLinearPart) {
  const auto p = make_preset("perturbed-ode", {}, 2.0);
  const double h = 0.01, t_end = 1.5;
  const Grid g = grid_for(p.window, h, t_end);
  const auto lin = solve(p.data, SourceTerm::zero(), g, kInf, t_end);
  const auto trunc = solve(p.data, SourceTerm::truncated(4), g, kInf, t_end);
  for (int k = 0; k <= lin.max_level; ++k)
    for (int i = 0; i < g.nx; ++i)
      if (lin.field.valid(k, i) && trunc.field.valid(k, i))
        ASSERT_GE(trunc.field.u(k, i), lin.field.u(k, i));
}

TEST(SolveProperties, FiniteSpeedOfPropagationIsBitExact) {
  const double a = 0.2, r = 0.6, h = 0.005;
  const auto base = make_preset("perturbed-ode", {}, 2.0);
  auto changed = base.data;
  changed.u0 = [u0 = base.data.u0, a, r](double x) { return std::abs(x - a) > r + 1e-9 ? u0(x) + 0.7 : u0(x); };
  changed.u1 = [u1 = base.data.u1, a, r](double x) { return std::abs(x - a) > r + 1e-9 ? u1(x) - 1.3 : u1(x); };
  const Grid g = grid_for(base.window, h, r);
  const auto o1 = solve(base.data, SourceTerm::exponential(), g, 25.0, r);
  const auto o2 = solve(changed, SourceTerm::exponential(), g, 25.0, r);
  const int ia = g.nearest_index(a);
  const int nr = g.nearest_level(r);
  int cells = 0;
  for (int n = 0; n <= nr; ++n)
    for (int i = ia - (nr - n); i <= ia + (nr - n); ++i) {
      ASSERT_TRUE(o1.field.valid(n, i));
      ASSERT_EQ(o1.field.u(n, i), o2.field.u(n, i)) << n << "," << i;
      ++cells;
    }
  EXPECT_GT(cells, 1000);
  // Outside the cone the change is visible.
  EXPECT_NE(o1.field.u(nr, ia + nr + 5), o2.field.u(nr, ia + nr + 5));
}

TEST(ConeMonotonicity, OdeSweepIsUniformlyBounded) {
  const auto p = make_preset("ode", {}, 1.5);
  const double h = 0.005;
  const auto out = solve(p.data, SourceTerm::exponential(), grid_for(p.window, h, 1.2), 25.0, 1.2);
  const auto r = check_cone_monotonicity(out, {0.0, 0.5}, 1.5);
  // Backward cone: the smallest difference is at t = 0, u is constant in x.
  EXPECT_NEAR(r.c_minus, 0.0, 1e-12);
  EXPECT_NEAR(r.apex_value, std::log(8.0), 1e-3);
  EXPECT_NEAR(r.c_plus, 0.0, 1e-12);
  std::vector<Point> apexes;
  for (double t = 0.1; t <= 0.9001; t += 0.1) apexes.push_back({0.0, t});
  const auto sweep = cone_monotonicity_sweep(out, apexes, 1.5);
  EXPECT_TRUE(std::isfinite(sweep.c_minus));
  EXPECT_TRUE(std::isfinite(sweep.c_plus));
  EXPECT_LE(sweep.c_minus, 1e-12);
  for (const auto& pt : sweep.points) {
    // u increases in time, so u(apex) exceeds everything below it.
    EXPECT_NEAR(pt.c_minus, 0.0, 1e-12);
  }
}

TEST(ConeMonotonicity, LinearSolutionBoundedByDataOscillation) {
  const auto data = make_initial_data([](double x) { return std::sin(3 * x); },
                                      [](double x) { return 0.5 * std::cos(x); }, Regularity::H1L2, {-2, 2});
  const double h = 0.01, t_end = 1.0;
  const auto out = solve(data, SourceTerm::zero(), grid_for({-2, 2}, h, t_end), kInf, t_end);
  // |u(y,s) - u(x,t)| <= osc(u0) + 2 t_max sup|u1|.
  const double bound = 2.0 + 2.0 * t_end * 0.5;
  for (double t : {0.2, 0.5, 0.8})
    for (double x : {-0.5, 0.0, 0.4}) {
      const auto r = check_cone_monotonicity(out, {x, t}, 2.0);
      EXPECT_LE(r.c_minus, bound);
      EXPECT_LE(r.c_plus, bound);
    }
}

TEST(ConeMonotonicity, UniformAcrossTruncationLevels) {
  const auto p = make_preset("perturbed-ode", {}, 2.0);
  const double h = 0.005, t_end = 0.9;
  const Grid g = grid_for(p.window, h, t_end);
  std::vector<ConeMonotonicity> rs;
  for (int n : {3, 5, 8}) {
    const auto out = solve(p.data, SourceTerm::truncated(n), g, kInf, t_end);
    rs.push_back(check_cone_monotonicity(out, {0.3, 0.4}, 2.0));
  }
  for (const auto& r : rs) {
    EXPECT_NEAR(r.c_minus, rs.back().c_minus, 0.1 * std::abs(rs.back().c_minus) + 1e-12);
    EXPECT_NEAR(r.c_plus, rs.back().c_plus, 0.1 * std::abs(rs.back().c_plus) + 1e-12);
  }
}

TEST(ConeMonotonicity, InvalidApexRejected) {
  const auto p = make_preset("ode", {}, 1.0);
  const auto out = solve(p.data, SourceTerm::exponential(), grid_for(p.window, 0.01, 0.5), 25.0, 0.5);
  EXPECT_THROW(check_cone_monotonicity(out, {0.0, 0.9}, 1.0), InvalidArgument);
  EXPECT_THROW(check_cone_monotonicity(out, {0.95, 0.3}, 1.0), InvalidArgument);
}

TEST(TruncationLimit, ConvergesBelowTheCurve) {
  const auto p = make_preset("ode", {}, 1.5);
  const double h = 1e-3;
  const Grid g = grid_for(p.window, h, 1.25);
  const auto r = truncation_limit(p.data, g, {0.0, 0.5}, {4, 6, 8, 10}, 1.0);
  EXPECT_EQ(r.branch, TruncationBranch::below);
  EXPECT_TRUE(r.monotone);
  for (std::size_t k = 1; k < r.levels.size(); ++k)
    EXPECT_NEAR(r.values[k], std::log(8.0), 1e-3) << "n = " << r.levels[k];
  EXPECT_LT(r.final_error, 1e-9);
}

TEST(TruncationLimit, DivergesAboveTheCurve) {
  const auto p = make_preset("ode", {}, 1.5);
  const double h = 1e-3;
  const Grid g = grid_for(p.window, h, 1.25);
  const auto r = truncation_limit(p.data, g, {0.0, 1.2}, {4, 6, 8, 10}, 1.0);
  EXPECT_EQ(r.branch, TruncationBranch::above);
  for (std::size_t k = 1; k < r.values.size(); ++k) EXPECT_GT(r.values[k], r.values[k - 1]);
  EXPECT_GT(r.values.back(), 10.0);
}

TEST(TruncationLimit, IndeterminateBandOnTheCurve) {
  const auto p = make_preset("ode", {}, 1.5);
  const Grid g = grid_for(p.window, 0.01, 1.1);
  const auto r = truncation_limit(p.data, g, {0.0, 1.0}, {2, 3}, 1.0);
  EXPECT_EQ(r.branch, TruncationBranch::indeterminate);
  EXPECT_EQ(r.values.size(), 2u);
}

TEST(TruncationLimit, ExponentialAndHighTruncationAgreeBelowThreshold) {
  const auto p = make_preset("perturbed-ode", {}, 2.0);
  const Grid g = grid_for(p.window, 0.01, 0.8);
  const auto full = solve(p.data, SourceTerm::exponential(), g, 25.0, 0.8);
  const auto trunc = solve(p.data, SourceTerm::truncated(30), g, kInf, 0.8);
  for (int n = 0; n <= full.max_level; ++n)
    for (int i = 0; i < g.nx; ++i)
      if (full.field.valid(n, i)) ASSERT_EQ(full.field.u(n, i), trunc.field.u(n, i));
}
