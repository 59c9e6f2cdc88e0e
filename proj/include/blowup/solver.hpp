#pragma once

#include <memory>
#include <string>
#include <vector>

#include "blowup/source.hpp"
#include "blowup/wavefield.hpp"

namespace blowup {

enum class StopReason { reached_t_end, threshold_exceeded, domain_exhausted };

std::string to_string(StopReason r);

struct SolveOutcome {
  WaveField field;
  StopReason stopped_reason = StopReason::reached_t_end;
  int max_level = 0;
  double u_max = 0.0;
  /// Per spatial index, the first level whose value exceeds u_max, or -1.
  std::vector<int> crossing_level;

  double crossing_time(int i) const {
    return crossing_level[i] < 0 ? -1.0 : field.t(crossing_level[i]);
  }
  bool blown(int n, int i) const { return field.valid(n, i) && field.u(n, i) > u_max; }
};

/// Raised when an update produces a non-finite value. Carries the outcome up
/// to the last level that was entirely finite.
class NumericalBlowThrough : public Error {
 public:
  NumericalBlowThrough(int last_level, std::shared_ptr<const SolveOutcome> partial)
      : Error("numerical blow-through"), last_level_(last_level), partial_(std::move(partial)) {}

  int last_level() const { return last_level_; }
  const SolveOutcome& partial() const { return *partial_; }

 private:
  int last_level_;
  std::shared_ptr<const SolveOutcome> partial_;
};

struct StepReport {
  int valid = 0;      // valid cells on the new level
  int crossings = 0;  // new-level cells above u_max
  int overflow = 0;   // cells whose update was not finite (marked invalid)
};

/// Writes level n + 1 of `field` with the CFL-one leapfrog
///   u^{n+1}_i = u^n_{i+1} + u^n_{i-1} - u^{n-1}_i + h^2 F(u^n_i).
/// A cell is computed only when its whole stencil is valid and none of the
/// level-n stencil cells exceeds u_max, so the valid set shrinks by one cell
/// per level at each end and behind every crossing.
StepReport step_leapfrog(WaveField& field, const SourceTerm& F, int n, double u_max);

/// Levels 0 and 1 of the three-level scheme: u0 samples, then the
/// second-order Taylor start 1/2(u0(x+h) + u0(x-h)) + h u1 + h^2/2 F(u0).
WaveField first_level(const InitialData& data, const SourceTerm& F, const Grid& grid);

struct SolveOptions {
  /// Stop as soon as any cell exceeds u_max instead of continuing on the
  /// remaining valid cells.
  bool stop_at_first_crossing = false;
};

/// Integrates u_tt = u_xx + F(u) on the light-cone-truncated grid until
/// t_end, until no valid cell remains, or (optionally) the first crossing.
SolveOutcome solve(const InitialData& data, const SourceTerm& F, const Grid& grid, double u_max,
                   double t_end, SolveOptions options = {});

/// Cone variation constants at a grid apex:
///   c_minus = max over the backward cone of u(y,s) - u(apex)
///   c_plus  = max over the forward cone within |y| <= R - s of u(apex) - u(y,s)
struct ConeMonotonicity {
  Point apex;
  double apex_value = 0.0;
  double c_minus = 0.0;
  double c_plus = 0.0;
  int cells_minus = 0;
  int cells_plus = 0;
};

ConeMonotonicity check_cone_monotonicity(const SolveOutcome& outcome, Point apex, double R);

/// Largest constants over a sweep of apexes.
struct ConeSweep {
  double c_minus = 0.0;
  double c_plus = 0.0;
  std::vector<ConeMonotonicity> points;
};

ConeSweep cone_monotonicity_sweep(const SolveOutcome& outcome, const std::vector<Point>& apexes,
                                  double R);

enum class TruncationBranch { below, above, indeterminate };

std::string to_string(TruncationBranch b);

struct TruncationLimit {
  Point point;
  TruncationBranch branch = TruncationBranch::indeterminate;
  std::vector<int> levels;
  std::vector<double> values;  // u_n(point) for each level
  double reference = 0.0;      // u(point) from the untruncated solve (below branch)
  bool monotone = false;       // values nondecreasing in n
  double final_error = 0.0;    // |u_n - u| at the largest n (below branch)
};

/// Solves the truncated problems at each level and reports u_n at `point`.
/// `blowup_time` is T(point.x); points within one cell of it are reported as
/// indeterminate.
TruncationLimit truncation_limit(const InitialData& data, const Grid& grid, Point point,
                                 const std::vector<int>& levels, double blowup_time,
                                 double u_max = 25.0);

}  // namespace blowup
