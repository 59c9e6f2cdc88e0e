#include "blowup/similarity.hpp"

#include <algorithm>
#include <cmath>

namespace blowup {

namespace {

struct Usable {
  const SolveOutcome& out;
  bool operator()(int n, int i) const { return out.field.valid(n, i) && !out.blown(n, i); }
};

// Second-order difference along one axis, skipping blown cells.
std::optional<double> diff(const Usable& ok, const WaveField& f, int n, int i, int dn, int di) {
  auto at = [&](int k) { return f.u(n + k * dn, i + k * di); };
  auto good = [&](int k) { return ok(n + k * dn, i + k * di); };
  const double h = f.grid().h;
  if (good(-1) && good(1)) return (at(1) - at(-1)) / (2.0 * h);
  if (good(-1) && good(-2)) return (3.0 * at(0) - 4.0 * at(-1) + at(-2)) / (2.0 * h);
  if (good(1) && good(2)) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
  return std::nullopt;
}

}  // namespace

std::optional<FieldSample> sample_field(const SolveOutcome& outcome, Point p) {
  const WaveField& f = outcome.field;
  const Grid& g = f.grid();
  const Usable ok{outcome};
  const double rt = (p.t - f.t0()) / g.h;
  const double rx = (p.x - g.x_min) / g.h;
  if (!(rt >= -1e-12) || !(rx >= -1e-12)) return std::nullopt;
  int n = static_cast<int>(std::floor(rt + 1e-12));
  int i = static_cast<int>(std::floor(rx + 1e-12));
  double wt = std::max(0.0, rt - n);
  double wx = std::max(0.0, rx - i);
  if (wt < 1e-12) wt = 0.0;
  if (wx < 1e-12) wx = 0.0;

  FieldSample s;
  for (int dn = 0; dn < 2; ++dn) {
    const double bt = dn == 0 ? 1.0 - wt : wt;
    if (bt == 0.0) continue;
    for (int di = 0; di < 2; ++di) {
      const double bx = di == 0 ? 1.0 - wx : wx;
      if (bx == 0.0) continue;
      const int nn = n + dn, ii = i + di;
      if (!ok(nn, ii)) return std::nullopt;
      const auto ut = diff(ok, f, nn, ii, 1, 0);
      const auto ux = diff(ok, f, nn, ii, 0, 1);
      if (!ut || !ux) return std::nullopt;
      s.u += bt * bx * f.u(nn, ii);
      s.ut += bt * bx * *ut;
      s.ux += bt * bx * *ux;
    }
  }
  return s;
}

std::vector<double> uniform_grid(double lo, double hi, int n) {
  if (n < 2) throw InvalidArgument("uniform grid needs at least 2 points");
  std::vector<double> v(n);
  for (int k = 0; k < n; ++k) v[k] = lo + (hi - lo) * k / (n - 1);
  return v;
}

Point SimilarityFrame::physical(int k, int j) const {
  const double e = std::exp(-s_grid[k]);
  return {a + y_grid[j] * e, T - e};
}

SimilarityFrame SimilarityFrame::from_function(const std::function<double(double, double)>& wf,
                                               const std::function<double(double, double)>& wsf,
                                               const std::function<double(double, double)>& wyf,
                                               std::vector<double> s_grid,
                                               std::vector<double> y_grid) {
  SimilarityFrame fr;
  fr.s_grid = std::move(s_grid);
  fr.y_grid = std::move(y_grid);
  fr.y_margin = 1.0 - std::max(std::abs(fr.y_grid.front()), std::abs(fr.y_grid.back()));
  for (double s : fr.s_grid)
    for (double y : fr.y_grid) {
      fr.w.push_back(wf(y, s));
      fr.ws.push_back(wsf(y, s));
      fr.wy.push_back(wyf(y, s));
    }
  return fr;
}

SimilarityFrame to_similarity(const SolveOutcome& outcome, double a, double T,
                              SimilarityOptions opt) {
  if (!(T > 0.0)) throw InvalidArgument("similarity frame needs T > 0");
  if (!(opt.y_margin > 0.0 && opt.y_margin < 1.0)) throw InvalidArgument("y margin must lie in (0, 1)");
  if (!(opt.levels_per_unit_s > 0.0)) throw InvalidArgument("levels per unit s must be positive");
  const double h = outcome.field.grid().h;

  SimilarityFrame fr;
  fr.a = a;
  fr.T = T;
  fr.y_margin = opt.y_margin;
  const double s_lo = std::isnan(opt.s_min) ? -std::log(T) : opt.s_min;
  const double s_cap = -std::log(opt.min_gap_cells * h);
  double s_hi = opt.s_max;
  if (s_hi > s_cap) {
    s_hi = s_cap;
    fr.truncated = true;
  }
  if (!(s_hi > s_lo)) throw InvalidArgument("empty s range");
  const double ds = 1.0 / opt.levels_per_unit_s;
  const int ns = static_cast<int>(std::floor((s_hi - s_lo) / ds + 1e-9)) + 1;
  if (ns < 1) throw InvalidArgument("empty s range");
  for (int k = 0; k < ns; ++k) fr.s_grid.push_back(s_lo + k * ds);
  fr.y_grid = uniform_grid(-1.0 + opt.y_margin, 1.0 - opt.y_margin, opt.ny);

  const std::size_t total = fr.s_grid.size() * fr.y_grid.size();
  fr.w.resize(total);
  fr.ws.resize(total);
  fr.wy.resize(total);
  for (int k = 0; k < fr.ns(); ++k) {
    const double s = fr.s_grid[k];
    const double e = std::exp(-s);
    for (int j = 0; j < fr.ny(); ++j) {
      const double y = fr.y_grid[j];
      const auto f = sample_field(outcome, fr.physical(k, j));
      if (!f) throw OutsideDomain("frame point outside computed field at s = " + std::to_string(s));
      fr.w[fr.at(k, j)] = f->u - 2.0 * s;
      fr.ws[fr.at(k, j)] = e * (f->ut - y * f->ux) - 2.0;
      fr.wy[fr.at(k, j)] = e * f->ux;
    }
  }
  return fr;
}

double equation_residual(const SimilarityFrame& fr) {
  if (fr.ns() < 3 || fr.ny() < 3) throw InvalidArgument("residual needs 3 levels in s and y");
  double worst = 0.0;
  for (int k = 1; k + 1 < fr.ns(); ++k) {
    const double ds2 = fr.s_grid[k + 1] - fr.s_grid[k - 1];
    for (int j = 1; j + 1 < fr.ny(); ++j) {
      const double dy2 = fr.y_grid[j + 1] - fr.y_grid[j - 1];
      const double y = fr.y_grid[j];
      const double yp = fr.y_grid[j + 1], ym = fr.y_grid[j - 1];
      const double wss = (fr.Ws(k + 1, j) - fr.Ws(k - 1, j)) / ds2;
      const double flux_y = ((1.0 - yp * yp) * fr.Wy(k, j + 1) - (1.0 - ym * ym) * fr.Wy(k, j - 1)) / dy2;
      const double wys = (fr.Ws(k, j + 1) - fr.Ws(k, j - 1)) / dy2;
      const double r = wss - flux_y - std::exp(fr.W(k, j)) + 2.0 + fr.Ws(k, j) + 2.0 * y * wys;
      worst = std::max(worst, std::abs(r));
    }
  }
  return worst;
}

namespace {

double integrand(const SimilarityFrame& fr, int k, int j) {
  const double y = fr.y_grid[j];
  const double s = fr.Ws(k, j), yv = fr.Wy(k, j), w = fr.W(k, j);
  return 0.5 * s * s + 0.5 * (1.0 - y * y) * yv * yv - std::exp(w) + 2.0 * w;
}

double lyapunov_stride(const SimilarityFrame& fr, int k, int stride) {
  double sum = 0.0;
  int prev = 0;
  for (int j = stride; j < fr.ny(); j += stride) {
    sum += 0.5 * (integrand(fr, k, prev) + integrand(fr, k, j)) * (fr.y_grid[j] - fr.y_grid[prev]);
    prev = j;
  }
  return sum;
}

}  // namespace

double lyapunov_level(const SimilarityFrame& fr, int k) { return lyapunov_stride(fr, k, 1); }

double lyapunov_level_coarse(const SimilarityFrame& fr, int k) {
  if ((fr.ny() - 1) % 2 != 0) throw InvalidArgument("coarse rule needs an even number of y cells");
  return lyapunov_stride(fr, k, 2);
}

double lyapunov(const SimilarityFrame& fr, double s) {
  if (s < fr.s_grid.front() - 1e-12 || s > fr.s_grid.back() + 1e-12)
    throw InvalidArgument("s outside frame range");
  if (fr.ns() == 1) return lyapunov_level(fr, 0);
  auto it = std::upper_bound(fr.s_grid.begin(), fr.s_grid.end(), s);
  int k = std::clamp(static_cast<int>(it - fr.s_grid.begin()), 1, fr.ns() - 1);
  const double w = (s - fr.s_grid[k - 1]) / (fr.s_grid[k] - fr.s_grid[k - 1]);
  return (1.0 - w) * lyapunov_level(fr, k - 1) + w * lyapunov_level(fr, k);
}

double boundary_flux(const SimilarityFrame& fr, int k) {
  const int j0 = 0, j1 = fr.ny() - 1;
  const double L = 0.5 * (fr.y_grid[j1] - fr.y_grid[j0]);
  const double wl = fr.Ws(k, j0), wr = fr.Ws(k, j1);
  return L * (wl * wl + wr * wr) - (1.0 - L * L) * (wr * fr.Wy(k, j1) - wl * fr.Wy(k, j0));
}

EnergyTrace energy_trace(const SimilarityFrame& fr) {
  EnergyTrace tr;
  tr.margin = fr.y_margin;
  const bool coarse = (fr.ny() - 1) % 2 == 0;
  for (int k = 0; k < fr.ns(); ++k) {
    tr.s.push_back(fr.s_grid[k]);
    tr.E.push_back(lyapunov_level(fr, k));
    tr.E_coarse.push_back(coarse ? lyapunov_level_coarse(fr, k) : tr.E.back());
    tr.flux.push_back(boundary_flux(fr, k));
  }
  double integral = 0.0;
  for (int k = 0; k < fr.ns(); ++k) {
    if (k > 0) integral += 0.5 * (tr.flux[k] + tr.flux[k - 1]) * (tr.s[k] - tr.s[k - 1]);
    tr.residual.push_back(std::abs(tr.E[k] - tr.E[0] + integral));
  }
  return tr;
}

namespace {

std::pair<int, int> level_range(const EnergyTrace& tr, double s1, double s2) {
  if (!(s1 < s2)) throw InvalidArgument("need s1 < s2");
  auto nearest = [&](double s) {
    auto it = std::lower_bound(tr.s.begin(), tr.s.end(), s);
    int k = static_cast<int>(it - tr.s.begin());
    if (k == static_cast<int>(tr.s.size())) return k - 1;
    if (k > 0 && s - tr.s[k - 1] < tr.s[k] - s) return k - 1;
    return k;
  };
  if (tr.s.empty() || s1 < tr.s.front() - 1e-9 || s2 > tr.s.back() + 1e-9)
    throw InvalidArgument("s outside trace range");
  return {nearest(s1), nearest(s2)};
}

double flux_integral(const EnergyTrace& tr, int k1, int k2, int stride) {
  double sum = 0.0;
  int prev = k1;
  for (int k = k1 + stride; k <= k2; k += stride) {
    sum += 0.5 * (tr.flux[k] + tr.flux[prev]) * (tr.s[k] - tr.s[prev]);
    prev = k;
  }
  return sum;
}

}  // namespace

double dissipation_identity(const EnergyTrace& tr, double s1, double s2) {
  const auto [k1, k2] = level_range(tr, s1, s2);
  return std::abs(tr.E[k2] - tr.E[k1] + flux_integral(tr, k1, k2, 1));
}

double dissipation_quadrature_error(const EnergyTrace& tr, double s1, double s2) {
  const auto [k1, k2] = level_range(tr, s1, s2);
  const double ey = (std::abs(tr.E[k1] - tr.E_coarse[k1]) + std::abs(tr.E[k2] - tr.E_coarse[k2])) / 3.0;
  double es = 0.0;
  if ((k2 - k1) % 2 == 0 && k2 - k1 >= 2)
    es = std::abs(flux_integral(tr, k1, k2, 1) - flux_integral(tr, k1, k2, 2)) / 3.0;
  return ey + es;
}

double max_energy_increase(const EnergyTrace& tr) {
  double worst = 0.0, running_min = tr.E.empty() ? 0.0 : tr.E.front();
  for (double e : tr.E) {
    worst = std::max(worst, e - running_min);
    running_min = std::min(running_min, e);
  }
  return worst;
}

FrameBounds frame_bounds(const SimilarityFrame& fr) {
  FrameBounds b;
  b.sup_upper = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < fr.ns(); ++k) {
    double sup_w = 0.0, energy = 0.0;
    for (int j = 0; j < fr.ny(); ++j) {
      sup_w = std::max(sup_w, std::abs(fr.W(k, j)));
      b.sup_upper = std::max(b.sup_upper, fr.W(k, j) + 2.0 * std::log(1.0 - std::abs(fr.y_grid[j])));
      if (j > 0) {
        auto e = [&](int jj) { return fr.Ws(k, jj) * fr.Ws(k, jj) + fr.Wy(k, jj) * fr.Wy(k, jj); };
        energy += 0.5 * (e(j) + e(j - 1)) * (fr.y_grid[j] - fr.y_grid[j - 1]);
      }
    }
    b.sup_w_plus_energy = std::max(b.sup_w_plus_energy, sup_w + energy);
  }
  return b;
}

}  // namespace blowup
