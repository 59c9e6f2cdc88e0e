#pragma once

#include <array>
#include <string>
#include <vector>

#include "blowup/grid.hpp"
#include "blowup/solver.hpp"

namespace blowup {

enum class CurveMethod { threshold, sqrt_extrapolation };

std::string to_string(CurveMethod m);

/// Blow-up time at one abscissa with fit diagnostics.
struct TEstimate {
  double x = 0.0;
  double T = 0.0;
  CurveMethod method = CurveMethod::threshold;
  double fit_residual = 0.0;  // rms residual of the fit over the span of the fitted values
  int fit_levels = 0;
  double t_last = 0.0;        // time of the last valid, unblown level at x
  bool low_confidence = false;
};

struct EstimateOptions {
  int fit_levels = 20;
  double residual_tol = 1e-2;
  /// Fits that extrapolate further than this beyond the last level are flagged.
  double max_extrapolation = 0.25;
};

/// T(x) from e^{-u/2} being affine in t near blow-up: least squares over the
/// last fit_levels valid levels at the node nearest x, root of the fitted line.
/// Falls back to first crossing + h/2 when the fit residual is too large.
TEstimate estimate_T_detail(const SolveOutcome& outcome, double x, EstimateOptions opt = {});
double estimate_T(const SolveOutcome& outcome, double x, EstimateOptions opt = {});

/// Samples of Gamma with a piecewise-linear interpolant.
struct BlowupCurve {
  std::vector<double> xs;
  std::vector<double> Ts;
  double h = 0.0;  // grid spacing of the underlying run (acceptance band 2h)
  double lipschitz_defect = 0.0;
  CurveMethod method = CurveMethod::sqrt_extrapolation;
  std::vector<TEstimate> estimates;  // empty for synthetic curves

  static BlowupCurve from_samples(std::vector<double> xs, std::vector<double> Ts, double h);

  std::size_t size() const { return xs.size(); }
  Interval span() const { return {xs.front(), xs.back()}; }
  /// Interpolated T; throws outside the sampled span.
  double T_at(double x) const;
  bool lipschitz_accepted() const { return lipschitz_defect <= 2.0 * h; }
};

/// Curve on the nodes in `window` (every `stride`-th node). Nodes where no
/// blow-up is detected or the fit is low-confidence are skipped.
BlowupCurve estimate_curve(const SolveOutcome& outcome, Interval window, int stride = 1,
                           EstimateOptions opt = {});

/// max over adjacent pairs of |dT| - |dx|.
double lipschitz_certificate(const BlowupCurve& curve);

struct ConeTestResult {
  double x0 = 0.0;
  double delta_min = 1.0;
  bool is_noncharacteristic = false;
  double margin = 0.0;
};

/// Smallest delta in {0.05, ..., 0.95} with
///   T(x) - T(x0) + delta |x - x0| >= margin |x - x0|
/// for every sample reached by the slope-delta cone above t = 0.
ConeTestResult noncharacteristic_test(const BlowupCurve& curve, double x0, double margin = 0.01);

/// Euclidean distance from p to the polyline through the samples.
double dist_to_gamma(const BlowupCurve& curve, Point p);

struct DistanceSandwich {
  double d = 0.0;
  double lower = 0.0;  // (T(x) - t)/sqrt 2
  double upper = 0.0;  // T(x) - t
  bool holds = false;
};

DistanceSandwich distance_sandwich(const BlowupCurve& curve, Point p, double tol = 1e-12);

struct ConeDistanceReport {
  Point p;
  std::array<Point, 2> boundary{};
  double d_p = 0.0;
  std::array<double, 2> d_boundary{};
  double C = 0.0;         // smallest C with d_j >= (d_p + |p - z_j|)/C
  double ratio_min = 0.0; // (T(x) - t)/(T(x0) - t) over samples in the backward cone
  double ratio_max = 0.0;
  double c = 0.0;         // max(ratio_max, 1/ratio_min)
  int cone_samples = 0;
};

ConeDistanceReport cone_distance_bounds(const BlowupCurve& curve, double x0, double t, double tau);

}  // namespace blowup
