#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <fstream>
#include <random>

#include "blowup/presets.hpp"
#include "blowup/wavefield.hpp"

using namespace blowup;

namespace {

InitialData constant_data(double a, double b, Interval window) {
  return make_initial_data([a](double) { return a; }, [b](double) { return b; }, Regularity::H1L2,
                           window);
}

// Independent oracle: exact derivative, fine trapezoid, window starts on a
// fine lattice.
double norm_oracle(const std::function<double(double)>& f, const std::function<double(double)>& df,
                   const std::function<double(double)>& g, Interval window, int per_unit) {
  const double q = 1.0 / per_unit;
  double best = 0.0;
  const int starts = static_cast<int>(std::lround((window.length() - 1.0) / q));
  for (int s = 0; s <= starts; ++s) {
    double acc = 0.0;
    for (int k = 0; k <= per_unit; ++k) {
      const double x = window.lo + (s + k) * q;
      const double w = (k == 0 || k == per_unit) ? 0.5 : 1.0;
      acc += w * (f(x) * f(x) + df(x) * df(x) + g(x) * g(x));
    }
    best = std::max(best, acc * q);
  }
  return std::sqrt(best);
}

StatePair random_pair(std::mt19937_64& rng, double lo, double hi, double h) {
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  const int modes = 5;
  std::vector<double> a(modes), b(modes), p(modes), q(modes);
  for (int m = 0; m < modes; ++m) {
    a[m] = c(rng) / (m + 1);
    b[m] = c(rng) / (m + 1);
    p[m] = std::numbers::pi * c(rng);
    q[m] = std::numbers::pi * c(rng);
  }
  const int n = static_cast<int>(std::lround((hi - lo) / h)) + 1;
  StatePair s{lo, h, std::vector<double>(n), std::vector<double>(n)};
  for (int i = 0; i < n; ++i) {
    const double x = lo + i * h;
    for (int m = 0; m < modes; ++m) {
      s.u[i] += a[m] * std::cos((m + 1) * x + p[m]);
      s.v[i] += b[m] * std::cos((m + 1) * x + q[m]);
    }
  }
  return s;
}

}  // namespace

TEST(NormH, ConstantPositionHasUnitNorm) {
  EXPECT_NEAR(norm_H(constant_data(1.0, 0.0, {-2, 2}), {-2, 2}), 1.0, 1e-12);
}

TEST(NormH, ConstantVelocity) {
  EXPECT_NEAR(norm_H(constant_data(0.0, 3.0, {-1, 1}), {-1, 1}), 3.0, 1e-12);
}

TEST(NormH, SineMatchesFineQuadratureOracle) {
  const auto data = make_initial_data([](double x) { return std::sin(x); }, [](double) { return 0.0; },
                                      Regularity::H1L2, {-std::numbers::pi, std::numbers::pi});
  // Refine the oracle until two successive values agree to 1e-8.
  double prev = 0.0;
  double oracle = 0.0;
  for (int per_unit = 1000;; per_unit *= 2) {
    oracle = norm_oracle([](double x) { return std::sin(x); }, [](double x) { return std::cos(x); },
                         [](double) { return 0.0; }, {-std::numbers::pi, std::numbers::pi}, per_unit);
    if (std::abs(oracle - prev) < 1e-8) break;
    prev = oracle;
  }
  EXPECT_NEAR(oracle, 1.0, 1e-8);  // sin^2 + cos^2 = 1 on every unit window
  EXPECT_NEAR(data.h_norm, oracle, 1e-6);
}

TEST(NormH, MonotoneUnderWindowInclusion) {
  const auto f = [](double x) { return std::exp(-x * x) + 0.3 * std::sin(3 * x); };
  const auto g = [](double x) { return std::cos(2 * x); };
  const auto data = make_initial_data(f, g, Regularity::H1L2, {-3, 3});
  const double inner = norm_H(data, {-1, 0.5});
  const double mid = norm_H(data, {-2, 1});
  const double outer = norm_H(data, {-3, 3});
  EXPECT_LE(inner, mid + 1e-9);
  EXPECT_LE(mid, outer + 1e-9);
}

TEST(NormH, NonFiniteDataIsRejected) {
  try {
    make_initial_data([](double x) { return x > 0.5 ? std::nan("") : 0.0; }, [](double) { return 0.0; },
                      Regularity::H1L2, {-1, 1});
    FAIL() << "expected an error";
  } catch (const InvalidArgument& e) {
    EXPECT_STREQ(e.what(), "non-finite initial data");
  }
}

TEST(NormH, SampledAndSamplerNormsAgree) {
  const auto data = make_initial_data([](double x) { return std::cos(x); },
                                      [](double x) { return 0.5 * x; }, Regularity::H1L2, {-2, 2}, 1e-3);
  const Grid g = Grid::covering({-2, 2}, 1e-3, 1);
  EXPECT_NEAR(norm_H(sample(data, g)), data.h_norm, 1e-5);
}

TEST(WaveGroup, ConstantVelocityGivesLinearGrowth) {
  const Grid g = Grid::covering({-2, 2}, 0.01, 1);
  const auto s = sample(constant_data(0.0, 1.0, {-2, 2}), g);
  const auto out = wave_group(s, 0.5);
  ASSERT_GT(out.size(), 0);
  for (int i = 0; i < out.size(); ++i) {
    EXPECT_NEAR(out.u[i], 0.5, 1e-12);
    EXPECT_NEAR(out.v[i], 1.0, 1e-12);
  }
  EXPECT_NEAR(out.x(0), -1.5, 1e-12);
}

TEST(WaveGroup, CosineStandingWave) {
  const double h = 1e-3;
  const Grid g = Grid::covering({-3, 3}, h, 1);
  const auto data = make_initial_data([](double x) { return std::cos(x); }, [](double) { return 0.0; },
                                      Regularity::H1L2, {-3, 3});
  const auto s = sample(data, g);
  const double t = 0.7;
  const auto out = wave_group(s, t);
  double err_u = 0.0, err_v = 0.0;
  for (int i = 0; i < out.size(); ++i) {
    const double x = out.x(i);
    err_u = std::max(err_u, std::abs(out.u[i] - std::cos(x) * std::cos(t)));
    err_v = std::max(err_v, std::abs(out.v[i] + std::cos(x) * std::sin(t)));
  }
  EXPECT_LT(err_u, 1e-12);
  EXPECT_LT(err_v, 1e-6);  // centered differences, O(h^2)
}

TEST(WaveGroup, FractionalShiftInterpolates) {
  const Grid g = Grid::covering({-2, 2}, 0.01, 1);
  const auto s = sample(constant_data(0.0, 1.0, {-2, 2}), g);
  const auto out = wave_group(s, 0.505);
  for (int i = 0; i < out.size(); ++i) EXPECT_NEAR(out.u[i], 0.505, 1e-12);
}

TEST(WaveGroup, GrowthConstantBelowFour) {
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto s = random_pair(rng, -6, 6, 0.01);
    const double base = norm_H(s);
    for (double t : {0.5, 1.0, 2.0}) {
      const auto out = wave_group(s, t);
      worst = std::max(worst, norm_H(out) / ((1.0 + t) * base));
    }
  }
  EXPECT_LE(worst, 4.0);
  EXPECT_GT(worst, 0.0);
}

TEST(WaveGroup, GroupPropertyAtGridAccuracy) {
  std::mt19937_64 rng(11);
  double errs[2];
  int k = 0;
  for (double h : {0.02, 0.01}) {
    std::mt19937_64 local = rng;
    const auto s = random_pair(local, -4, 4, h);
    const auto ab = wave_group(wave_group(s, 0.4), 0.6);
    const auto direct = wave_group(s, 1.0);
    // Common domain: both start at x_min + 1.
    double err = 0.0;
    const int n = std::min(ab.size(), direct.size());
    for (int i = 0; i < n; ++i) {
      err = std::max(err, std::abs(ab.u[i] - direct.u[i]));
      err = std::max(err, std::abs(ab.v[i] - direct.v[i]));
    }
    errs[k++] = err;
  }
  EXPECT_LT(errs[0], 5e-3);
  EXPECT_GT(std::log2(errs[0] / errs[1]), 1.8);
}

TEST(WaveGroup, DomainExhaustedWhenShiftTooLarge) {
  const Grid g = Grid::covering({-1, 1}, 0.1, 1);
  const auto s = sample(constant_data(0.0, 1.0, {-1, 1}), g);
  EXPECT_THROW(wave_group(s, 0.96), DomainExhausted);
  EXPECT_THROW(wave_group(s, -0.1), InvalidArgument);
}

TEST(WaveGroup, Deterministic) {
  std::mt19937_64 a(3), b(3);
  const auto s1 = random_pair(a, -3, 3, 0.01);
  const auto s2 = random_pair(b, -3, 3, 0.01);
  const auto o1 = wave_group(s1, 0.8);
  const auto o2 = wave_group(s2, 0.8);
  EXPECT_EQ(o1.u, o2.u);
  EXPECT_EQ(o1.v, o2.v);
  EXPECT_EQ(norm_H(o1), norm_H(o2));
}

TEST(Sobolev, ConstantIsSqrtTwo) { EXPECT_DOUBLE_EQ(sobolev_embedding_constant(), std::sqrt(2.0)); }

TEST(Sobolev, BoundHoldsOnRandomSamples) {
  const double c = sobolev_embedding_constant();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = 1001;
  const double h = 1.0 / (n - 1);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    std::vector<double> v(n);
    // Random piecewise-linear function through 8 random knots.
    std::vector<double> knots(9);
    for (auto& kv : knots) kv = u(rng) * 5.0;
    for (int i = 0; i < n; ++i) {
      const double x = i * h * 8.0;
      const int j = std::min(7, static_cast<int>(x));
      v[i] = knots[j] + (x - j) * (knots[j + 1] - knots[j]);
    }
    double sup = 0.0, l2 = 0.0, d2 = 0.0;
    for (int i = 0; i < n; ++i) sup = std::max(sup, std::abs(v[i]));
    for (int i = 0; i + 1 < n; ++i) {
      l2 += 0.5 * h * (v[i] * v[i] + v[i + 1] * v[i + 1]);
      const double d = (v[i + 1] - v[i]) / h;
      d2 += h * d * d;
    }
    worst = std::max(worst, sup / std::sqrt(l2 + d2));
  }
  EXPECT_LE(worst, c);
}

TEST(Sobolev, ConstantFunctionRatioIsOne) {
  // |c|_inf / |c|_{H^1(J)} = 1 on a unit interval.
  EXPECT_LE(1.0, sobolev_embedding_constant());
}

TEST(Sobolev, SpikeRatioStaysBelowBound) {
  for (double w : {0.5, 0.1, 0.01}) {
    const int n = 200001;
    const double h = 1.0 / (n - 1);
    double sup = 0.0, l2 = 0.0, d2 = 0.0;
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = std::max(0.0, 1.0 - std::abs(i * h - 0.5) / w);
    for (int i = 0; i < n; ++i) sup = std::max(sup, v[i]);
    for (int i = 0; i + 1 < n; ++i) {
      l2 += 0.5 * h * (v[i] * v[i] + v[i + 1] * v[i + 1]);
      const double d = (v[i + 1] - v[i]) / h;
      d2 += h * d * d;
    }
    EXPECT_LE(sup / std::sqrt(l2 + d2), sobolev_embedding_constant()) << "w = " << w;
  }
}

TEST(WaveField, CausalityAndFinitenessInvariant) {
  WaveField f(Grid{0.0, 0.1, 5, 3});
  f.push_level({0, 0, 0, 0, 0}, {1, 1, 1, 1, 1});
  f.push_level({0, 1, 1, 1, 0}, {0, 1, 1, 1, 0});
  EXPECT_TRUE(f.check_invariants());
  f.push_level({1, 0, 0, 0, 0}, {1, 0, 0, 0, 0});
  EXPECT_FALSE(f.check_invariants());
}

TEST(WaveField, Derivatives) {
  WaveField f(Grid{0.0, 0.5, 4, 3});
  f.push_level({0, 0.5, 1, 1.5}, {1, 1, 1, 1});
  f.push_level({1, 1.5, 2, 2.5}, {1, 1, 1, 1});
  f.push_level({2, 2.5, 3, 3.5}, {1, 1, 1, 1});
  EXPECT_DOUBLE_EQ(*f.u_x(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(*f.u_x(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(*f.u_t(1, 2), 2.0);
  EXPECT_DOUBLE_EQ(*f.u_t(0, 2), 2.0);
  EXPECT_DOUBLE_EQ(*f.u_t(2, 3), 2.0);
}

TEST(Presets, CsvRoundTripAndValidation) {
  const std::string path = ::testing::TempDir() + "/data.csv";
  {
    std::ofstream out(path);
    out << "x,u0,u1\n";
    for (int i = 0; i <= 40; ++i) out << (-1.0 + 0.05 * i) << "," << 2.0 << "," << 0.5 << "\n";
  }
  const auto p = load_csv_preset(path);
  EXPECT_DOUBLE_EQ(p.data.u0(0.123), 2.0);
  EXPECT_DOUBLE_EQ(p.data.u1(-0.5), 0.5);
  EXPECT_THROW(p.data.u0(1.5), InvalidArgument);
  {
    std::ofstream out(path);
    out << "x;u0;u1\n0;1;2\n";
  }
  EXPECT_THROW(load_csv_preset(path), InvalidArgument);
}

TEST(Presets, UnknownNamesAndParametersRejected) {
  EXPECT_THROW(make_preset("nope", {}), InvalidArgument);
  EXPECT_THROW(make_preset("ode", {{"kappa", 0.5}}), InvalidArgument);
  EXPECT_THROW(make_preset("tilted", {{"kappa", 1.5}}), InvalidArgument);
}

TEST(Presets, TiltedMatchesClosedForm) {
  const auto p = make_preset("tilted", {{"kappa", 0.5}});
  ASSERT_TRUE(p.exact);
  EXPECT_NEAR(p.data.u0(0.3), p.exact->u(0.3, 0.0), 1e-14);
  EXPECT_NEAR(p.exact->blowup_time(0.4), 1.2, 1e-14);
  EXPECT_GT(p.window.lo, -2.0);
}
