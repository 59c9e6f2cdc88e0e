#include "blowup/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace blowup {

std::string to_string(CurveMethod m) {
  return m == CurveMethod::threshold ? "threshold" : "sqrt_extrapolation";
}

namespace {

bool any_crossing(const SolveOutcome& out) {
  return std::any_of(out.crossing_level.begin(), out.crossing_level.end(),
                     [](int c) { return c >= 0; });
}

Error no_blowup(double x) { return Error("no blow-up detected at x = " + std::to_string(x)); }

}  // namespace

TEstimate estimate_T_detail(const SolveOutcome& outcome, double x, EstimateOptions opt) {
  const WaveField& f = outcome.field;
  const Grid& g = f.grid();
  const int i = g.nearest_index(x);
  if (!g.in_range(i)) throw InvalidArgument("x outside grid");
  if (opt.fit_levels < 3) throw InvalidArgument("fit needs at least 3 levels");

  TEstimate est;
  est.x = g.x(i);
  if (!any_crossing(outcome)) throw no_blowup(x);
  const int crossing = outcome.crossing_level[i];
  auto threshold = [&]() {
    if (crossing < 0) throw no_blowup(x);
    est.method = CurveMethod::threshold;
    est.T = f.t(crossing) + 0.5 * g.h;
    return est;
  };

  std::vector<double> ts, zs;
  for (int n = 0; n <= outcome.max_level; ++n) {
    if (!f.valid(n, i) || outcome.blown(n, i)) continue;
    ts.push_back(f.t(n));
    zs.push_back(std::exp(-0.5 * f.u(n, i)));
  }
  if (ts.empty()) return threshold();
  est.t_last = ts.back();
  const std::size_t k = std::min<std::size_t>(ts.size(), opt.fit_levels);
  if (k < 3) return threshold();
  const std::size_t first = ts.size() - k;

  double tm = 0.0, zm = 0.0;
  for (std::size_t j = first; j < ts.size(); ++j) {
    tm += ts[j];
    zm += zs[j];
  }
  tm /= static_cast<double>(k);
  zm /= static_cast<double>(k);
  double stt = 0.0, stz = 0.0;
  for (std::size_t j = first; j < ts.size(); ++j) {
    stt += (ts[j] - tm) * (ts[j] - tm);
    stz += (ts[j] - tm) * (zs[j] - zm);
  }
  const double slope = stz / stt;
  if (!(slope < 0.0)) return threshold();

  double ss = 0.0, zlo = zs[first], zhi = zs[first];
  for (std::size_t j = first; j < ts.size(); ++j) {
    const double r = zs[j] - (zm + slope * (ts[j] - tm));
    ss += r * r;
    zlo = std::min(zlo, zs[j]);
    zhi = std::max(zhi, zs[j]);
  }
  const double span = zhi - zlo;
  est.fit_residual = span > 0.0 ? std::sqrt(ss / static_cast<double>(k)) / span
                                 : std::numeric_limits<double>::infinity();
  est.fit_levels = static_cast<int>(k);
  if (!(est.fit_residual <= opt.residual_tol)) return threshold();

  est.method = CurveMethod::sqrt_extrapolation;
  est.T = tm - zm / slope;
  est.low_confidence = est.T - est.t_last > opt.max_extrapolation;
  return est;
}

double estimate_T(const SolveOutcome& outcome, double x, EstimateOptions opt) {
  return estimate_T_detail(outcome, x, opt).T;
}

BlowupCurve BlowupCurve::from_samples(std::vector<double> xs, std::vector<double> Ts, double h) {
  if (xs.size() != Ts.size()) throw InvalidArgument("curve arrays differ in length");
  if (xs.size() < 2) throw InvalidArgument("curve needs at least 2 samples");
  for (std::size_t j = 0; j < xs.size(); ++j) {
    if (!std::isfinite(Ts[j]) || !(Ts[j] > 0.0)) throw InvalidArgument("curve values must be finite and positive");
    if (j > 0 && !(xs[j] > xs[j - 1])) throw InvalidArgument("curve abscissae must increase");
  }
  BlowupCurve c;
  c.xs = std::move(xs);
  c.Ts = std::move(Ts);
  c.h = h;
  c.lipschitz_defect = lipschitz_certificate(c);
  return c;
}

double BlowupCurve::T_at(double x) const {
  if (x < xs.front() - 1e-12 || x > xs.back() + 1e-12) throw OutsideDomain("x outside the sampled curve");
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t j = static_cast<std::size_t>(it - xs.begin());
  j = std::clamp<std::size_t>(j, 1, xs.size() - 1);
  const double w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
  return (1.0 - w) * Ts[j - 1] + w * Ts[j];
}

BlowupCurve estimate_curve(const SolveOutcome& outcome, Interval window, int stride,
                           EstimateOptions opt) {
  if (stride < 1) throw InvalidArgument("stride must be >= 1");
  const Grid& g = outcome.field.grid();
  const int lo = std::max(0, static_cast<int>(std::ceil((window.lo - g.x_min) / g.h - 1e-9)));
  const int hi = std::min(g.nx - 1, static_cast<int>(std::floor((window.hi - g.x_min) / g.h + 1e-9)));
  std::vector<double> xs, Ts;
  std::vector<TEstimate> kept;
  bool all_fit = true;
  for (int i = lo; i <= hi; i += stride) {
    try {
      const TEstimate e = estimate_T_detail(outcome, g.x(i), opt);
      if (e.low_confidence) continue;
      all_fit = all_fit && e.method == CurveMethod::sqrt_extrapolation;
      xs.push_back(e.x);
      Ts.push_back(e.T);
      kept.push_back(e);
    } catch (const Error&) {
    }
  }
  if (xs.size() < 2) throw Error("no blow-up detected on the window");
  BlowupCurve c = BlowupCurve::from_samples(std::move(xs), std::move(Ts), g.h);
  c.method = all_fit ? CurveMethod::sqrt_extrapolation : CurveMethod::threshold;
  c.estimates = std::move(kept);
  return c;
}

double lipschitz_certificate(const BlowupCurve& curve) {
  double defect = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j < curve.size(); ++j)
    defect = std::max(defect, std::abs(curve.Ts[j] - curve.Ts[j - 1]) - std::abs(curve.xs[j] - curve.xs[j - 1]));
  return defect;
}

ConeTestResult noncharacteristic_test(const BlowupCurve& curve, double x0, double margin) {
  const double T0 = curve.T_at(x0);
  int left = 0, right = 0;
  for (double x : curve.xs) {
    if (x < x0 - 1e-12) ++left;
    if (x > x0 + 1e-12) ++right;
  }
  if (left < 2 || right < 2) throw InvalidArgument("insufficient cone coverage");

  ConeTestResult r;
  r.x0 = x0;
  r.margin = margin;
  for (int k = 1; k <= 19; ++k) {
    const double delta = 0.05 * k;
    bool ok = true;
    for (std::size_t j = 0; j < curve.size() && ok; ++j) {
      const double d = std::abs(curve.xs[j] - x0);
      if (d < 1e-12 || delta * d >= T0) continue;
      ok = curve.Ts[j] - T0 + delta * d >= margin * d;
    }
    if (ok) {
      r.delta_min = delta;
      break;
    }
  }
  r.is_noncharacteristic = r.delta_min < 1.0 - margin;
  return r;
}

namespace {

double segment_distance(Point p, Point a, Point b) {
  const double dx = b.x - a.x, dt = b.t - a.t;
  const double len2 = dx * dx + dt * dt;
  double w = len2 > 0.0 ? ((p.x - a.x) * dx + (p.t - a.t) * dt) / len2 : 0.0;
  w = std::clamp(w, 0.0, 1.0);
  return std::hypot(p.x - (a.x + w * dx), p.t - (a.t + w * dt));
}

}  // namespace

double dist_to_gamma(const BlowupCurve& curve, Point p) {
  const double T = curve.T_at(p.x);
  if (p.t > T + 1e-12) throw OutsideDomain();
  // The vertical foot (x, T(x)) is at distance T - t, so only segments
  // reaching into [x - (T - t), x + (T - t)] can be closer.
  const double reach = T - p.t;
  const auto lo = std::lower_bound(curve.xs.begin(), curve.xs.end(), p.x - reach);
  const auto hi = std::upper_bound(curve.xs.begin(), curve.xs.end(), p.x + reach);
  const std::size_t first = std::max<std::ptrdiff_t>(1, lo - curve.xs.begin());
  const std::size_t last = std::min<std::size_t>(curve.size() - 1, hi - curve.xs.begin());
  double d = reach;
  for (std::size_t j = first; j <= last; ++j)
    d = std::min(d, segment_distance(p, {curve.xs[j - 1], curve.Ts[j - 1]}, {curve.xs[j], curve.Ts[j]}));
  return d;
}

DistanceSandwich distance_sandwich(const BlowupCurve& curve, Point p, double tol) {
  DistanceSandwich s;
  s.d = dist_to_gamma(curve, p);
  s.upper = curve.T_at(p.x) - p.t;
  s.lower = s.upper / std::sqrt(2.0);
  s.holds = s.d >= s.lower - tol && s.d <= s.upper + tol;
  return s;
}

ConeDistanceReport cone_distance_bounds(const BlowupCurve& curve, double x0, double t, double tau) {
  const double T0 = curve.T_at(x0);
  if (!(tau >= 0.0 && tau < t && t < T0)) throw InvalidArgument("need 0 <= tau < t < T(x0)");
  if (!noncharacteristic_test(curve, x0).is_noncharacteristic)
    throw InvalidArgument("lemma hypotheses not met");

  ConeDistanceReport r;
  r.p = {x0, t};
  r.boundary = {Point{x0 + (t - tau), tau}, Point{x0 - (t - tau), tau}};
  r.d_p = dist_to_gamma(curve, r.p);
  for (int j = 0; j < 2; ++j) {
    const Point z = r.boundary[j];
    r.d_boundary[j] = dist_to_gamma(curve, z);
    const double reach = r.d_p + std::hypot(z.x - x0, z.t - t);
    r.C = std::max(r.C, reach / r.d_boundary[j]);
  }

  r.ratio_min = r.ratio_max = 1.0;
  for (std::size_t j = 0; j < curve.size(); ++j) {
    if (std::abs(curve.xs[j] - x0) >= T0 - t) continue;
    const double q = (curve.Ts[j] - t) / (T0 - t);
    r.ratio_min = std::min(r.ratio_min, q);
    r.ratio_max = std::max(r.ratio_max, q);
    ++r.cone_samples;
  }
  r.c = std::max(r.ratio_max, 1.0 / r.ratio_min);
  return r;
}

}  // namespace blowup
