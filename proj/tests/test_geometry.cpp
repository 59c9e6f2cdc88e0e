#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "blowup/geometry.hpp"
#include "blowup/presets.hpp"

using namespace blowup;

namespace {

SolveOutcome run(const Preset& p, double h, double t_end, double u_max = 25.0) {
  const Grid g = Grid::covering(p.window, h, static_cast<int>(std::lround(t_end / h)) + 2);
  return solve(p.data, SourceTerm::exponential(), g, u_max, t_end);
}

BlowupCurve line(double slope, double T0, double lo, double hi, double dx) {
  std::vector<double> xs, Ts;
  for (double x = lo; x <= hi + 1e-12; x += dx) {
    xs.push_back(x);
    Ts.push_back(T0 + slope * x);
  }
  return BlowupCurve::from_samples(xs, Ts, dx);
}

}  // namespace

TEST(EstimateT, OdeRootIsFirstOrderAccurate) {
  const auto p = make_preset("ode", {}, 2.0);
  const auto coarse = estimate_T_detail(run(p, 1e-3, 1.5), 0.0);
  const auto fine = estimate_T_detail(run(p, 5e-4, 1.5), 0.0);
  EXPECT_EQ(coarse.method, CurveMethod::sqrt_extrapolation);
  EXPECT_NEAR(coarse.T, 1.0, 1e-3);
  EXPECT_LT(std::abs(fine.T - 1.0), 0.6 * std::abs(coarse.T - 1.0));
}

TEST(EstimateT, TiltedPoint) {
  const auto p = make_preset("tilted", {{"kappa", 0.5}}, 2.0);
  EXPECT_NEAR(estimate_T(run(p, 1e-3, 2.0), 0.4), 1.2, 5e-3);
}

TEST(EstimateT, LinearRunHasNoBlowup) {
  const auto p = make_preset("ode", {}, 1.0);
  const Grid g = Grid::covering(p.window, 0.01, 80);
  const auto out = solve(p.data, SourceTerm::zero(), g, 25.0, 0.7);
  try {
    estimate_T(out, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("no blow-up detected"), std::string::npos);
  }
}

TEST(EstimateT, FallsBackToThresholdOnPoorFit) {
  const auto p = make_preset("ode", {}, 2.0);
  const auto out = run(p, 1e-2, 1.5);
  EstimateOptions opt;
  opt.residual_tol = 0.0;
  const auto e = estimate_T_detail(out, 0.0, opt);
  EXPECT_EQ(e.method, CurveMethod::threshold);
  EXPECT_DOUBLE_EQ(e.T, out.crossing_time(out.field.grid().nearest_index(0.0)) + 0.005);
}

TEST(Curve, TiltedFamily) {
  for (double kappa : {0.25, 0.5, 0.75}) {
    const auto p = make_preset("tilted", {{"kappa", kappa}}, 2.0);
    const auto out = run(p, 1e-3, 2.5);
    const auto curve = estimate_curve(out, {-0.5, 0.5}, 20);
    ASSERT_GE(curve.size(), 40u) << kappa;
    double err = 0.0;
    for (std::size_t j = 0; j < curve.size(); ++j)
      err = std::max(err, std::abs(curve.Ts[j] - (1.0 + kappa * curve.xs[j])));
    EXPECT_LE(err, 5e-3) << kappa;
    EXPECT_TRUE(curve.lipschitz_accepted()) << kappa;
    const auto cone = noncharacteristic_test(curve, 0.0);
    EXPECT_TRUE(cone.is_noncharacteristic);
    EXPECT_LE(std::abs(cone.delta_min - kappa), 0.05 + 1e-9) << kappa;
  }
}

TEST(Lipschitz, Certificates) {
  const auto flat = line(0.0, 1.0, -1.0, 1.0, 0.01);
  EXPECT_NEAR(lipschitz_certificate(flat), -0.01, 1e-12);
  EXPECT_TRUE(flat.lipschitz_accepted());
  const auto tilted = line(0.5, 1.0, -1.0, 1.0, 0.01);
  EXPECT_NEAR(lipschitz_certificate(tilted), -0.005, 1e-12);
  const auto steep = line(1.5, 3.0, -1.0, 1.0, 0.1);
  EXPECT_NEAR(lipschitz_certificate(steep), 0.05, 1e-12);
  auto bad = steep;
  bad.h = 0.01;
  bad.lipschitz_defect = lipschitz_certificate(bad);
  EXPECT_FALSE(bad.lipschitz_accepted());
}

TEST(ConeTest, FlatTiltedCorner) {
  const auto flat = line(0.0, 1.0, -2.0, 2.0, 0.01);
  const auto f = noncharacteristic_test(flat, 0.0);
  EXPECT_DOUBLE_EQ(f.delta_min, 0.05);
  EXPECT_TRUE(f.is_noncharacteristic);

  const auto t = noncharacteristic_test(line(0.5, 1.0, -1.5, 1.5, 0.01), 0.0);
  EXPECT_GE(t.delta_min, 0.5);
  EXPECT_LE(t.delta_min, 0.55 + 1e-12);

  std::vector<double> xs, Ts;
  for (int j = -100; j <= 100; ++j) {
    xs.push_back(0.01 * j);
    Ts.push_back(1.0 - std::abs(0.01 * j) + 0.5);
  }
  const auto corner = noncharacteristic_test(BlowupCurve::from_samples(xs, Ts, 0.01), 0.0);
  EXPECT_FALSE(corner.is_noncharacteristic);
  EXPECT_EQ(corner.delta_min, 1.0);

  EXPECT_THROW(noncharacteristic_test(line(0.0, 1.0, 0.0, 1.0, 0.1), 0.05), InvalidArgument);
}

TEST(Distance, PointToPolyline) {
  const auto flat = line(0.0, 1.0, -2.0, 2.0, 0.1);
  EXPECT_NEAR(dist_to_gamma(flat, {0.0, 0.4}), 0.6, 1e-12);
  const auto tilted = line(0.5, 1.0, -1.5, 1.5, 0.1);
  const double d = dist_to_gamma(tilted, {0.0, 0.0});
  EXPECT_NEAR(d, 1.0 / std::sqrt(1.25), 1e-12);
  EXPECT_NEAR(dist_to_gamma(tilted, {0.3, 1.15}), 0.0, 1e-15);
  EXPECT_THROW(dist_to_gamma(flat, {0.0, 1.5}), OutsideDomain);
}

TEST(Distance, SandwichOnRandomProbes) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> xs, Ts;
  double T = 2.0;
  for (int j = 0; j <= 400; ++j) {
    xs.push_back(-2.0 + 0.01 * j);
    Ts.push_back(T);
    T += 0.01 * (2.0 * u(rng) - 1.0);
  }
  const auto c = BlowupCurve::from_samples(xs, Ts, 0.01);
  ASSERT_LE(c.lipschitz_defect, 0.0);
  for (int k = 0; k < 1000; ++k) {
    const double x = -1.0 + 2.0 * u(rng);
    const Point p{x, u(rng) * c.T_at(x)};
    EXPECT_TRUE(distance_sandwich(c, p).holds);
  }
}

TEST(ConeDistance, TiltedAndFlat) {
  const auto tilted = line(0.5, 1.0, -1.5, 1.5, 0.01);
  const auto r = cone_distance_bounds(tilted, 0.0, 0.5, 0.25);
  // Distances to the line t = 1 + x/2 in closed form.
  auto dline = [](Point p) { return (1.0 + 0.5 * p.x - p.t) / std::sqrt(1.25); };
  EXPECT_NEAR(r.d_p, dline({0.0, 0.5}), 1e-12);
  EXPECT_NEAR(r.d_boundary[0], dline({0.25, 0.25}), 1e-12);
  EXPECT_NEAR(r.d_boundary[1], dline({-0.25, 0.25}), 1e-12);
  EXPECT_LE(r.C, 4.0);
  EXPECT_GE(r.ratio_min, 1.0 - 0.55);
  EXPECT_LE(r.ratio_max, 2.0);

  const auto flat = cone_distance_bounds(line(0.0, 1.0, -2.0, 2.0, 0.01), 0.0, 0.5, 0.25);
  EXPECT_DOUBLE_EQ(flat.ratio_min, 1.0);
  EXPECT_DOUBLE_EQ(flat.ratio_max, 1.0);

  const auto near = cone_distance_bounds(tilted, 0.0, 0.5, 0.5 - 1e-9);
  EXPECT_NEAR(near.C, 1.0, 1e-6);
}

TEST(ConeDistance, RejectsCharacteristicPoint) {
  std::vector<double> xs, Ts;
  for (int j = -100; j <= 100; ++j) {
    xs.push_back(0.01 * j);
    Ts.push_back(1.5 - std::abs(0.01 * j));
  }
  const auto c = BlowupCurve::from_samples(xs, Ts, 0.01);
  EXPECT_THROW(cone_distance_bounds(c, 0.0, 0.5, 0.25), InvalidArgument);
}
