#include "blowup/presets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

namespace blowup {

namespace {

double param(const PresetParams& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

void reject_unknown(const PresetParams& p, std::initializer_list<const char*> known) {
  for (const auto& [key, value] : p) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
      throw InvalidArgument("unknown preset parameter: " + key);
  }
}

Preset ode(const PresetParams& p, double R) {
  reject_unknown(p, {"T"});
  const double T = param(p, "T", 1.0);
  if (!(T > 0.0)) throw InvalidArgument("ode preset needs T > 0");
  Interval window{-R, R};
  auto data = make_initial_data([T](double) { return std::log(2.0 / (T * T)); },
                                [T](double) { return 2.0 / T; }, Regularity::W1infLinf, window, 1e-3,
                                "ode");
  ExactSolution exact{[T](double, double t) { return std::log(2.0 / ((T - t) * (T - t))); },
                      [T](double) { return T; }};
  return {"ode", std::move(data), window, exact};
}

Preset tilted(const PresetParams& p, double R) {
  reject_unknown(p, {"kappa", "T"});
  const double k = param(p, "kappa", 0.5);
  const double T = param(p, "T", 1.0);
  if (!(std::abs(k) < 1.0)) throw InvalidArgument("tilted preset needs |kappa| < 1");
  if (!(T > 0.0)) throw InvalidArgument("tilted preset needs T > 0");
  // T + k x vanishes at x = -T/k; keep the window where T + k x >= T/16.
  Interval window{-R, R};
  if (k > 0.0) window.lo = std::max(-R, -(15.0 / 16.0) * T / k);
  if (k < 0.0) window.hi = std::min(R, (15.0 / 16.0) * T / (-k));
  const double c = 2.0 * (1.0 - k * k);
  auto u0 = [=](double x) { return std::log(c / ((T + k * x) * (T + k * x))); };
  auto u1 = [=](double x) { return 2.0 / (T + k * x); };
  Interval norm_window = window;
  if (norm_window.length() < 1.0) norm_window.hi = norm_window.lo + 1.0;
  auto data = make_initial_data(u0, u1, Regularity::W1infLinf, norm_window, 1e-3, "tilted");
  ExactSolution exact{[=](double x, double t) {
                        const double z = T + k * x - t;
                        return std::log(c / (z * z));
                      },
                      [=](double x) { return T + k * x; }};
  return {"tilted", std::move(data), window, exact};
}

Preset perturbed_ode(const PresetParams& p, double R) {
  reject_unknown(p, {"amplitude"});
  const double eps = param(p, "amplitude", 0.3);
  Interval window{-R, R};
  auto data = make_initial_data(
      [eps](double x) { return std::log(2.0) + eps * std::cos(std::numbers::pi * x); },
      [](double) { return 2.0; }, Regularity::W1infLinf, window, 1e-3, "perturbed-ode");
  return {"perturbed-ode", std::move(data), window, std::nullopt};
}

Preset random_band_limited(const PresetParams& p, double R, std::uint64_t seed) {
  reject_unknown(p, {"modes", "amplitude", "offset", "length"});
  const int modes = static_cast<int>(param(p, "modes", 4));
  const double amp = param(p, "amplitude", 0.5);
  const double offset = param(p, "offset", 0.0);
  const double L = param(p, "length", 2.0);
  if (modes < 1) throw InvalidArgument("random-band-limited needs modes >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  struct Coeffs {
    std::vector<double> a, b, c, d;
  };
  auto co = std::make_shared<Coeffs>();
  for (int m = 1; m <= modes; ++m) {
    const double scale = amp / m;
    co->a.push_back(scale * unit(rng));
    co->b.push_back(scale * unit(rng));
    co->c.push_back(scale * unit(rng));
    co->d.push_back(scale * unit(rng));
  }
  const double w = std::numbers::pi / L;
  auto u0 = [co, w, offset](double x) {
    double s = offset;
    for (std::size_t m = 0; m < co->a.size(); ++m) {
      const double arg = w * static_cast<double>(m + 1) * x;
      s += co->a[m] * std::cos(arg) + co->b[m] * std::sin(arg);
    }
    return s;
  };
  auto u1 = [co, w](double x) {
    double s = 0.0;
    for (std::size_t m = 0; m < co->c.size(); ++m) {
      const double arg = w * static_cast<double>(m + 1) * x;
      s += co->c[m] * std::cos(arg) + co->d[m] * std::sin(arg);
    }
    return s;
  };
  Interval window{-R, R};
  auto data = make_initial_data(u0, u1, Regularity::W1infLinf, window, 1e-3, "random-band-limited");
  return {"random-band-limited", std::move(data), window, std::nullopt};
}

Preset constant(const PresetParams& p, double R) {
  reject_unknown(p, {"value", "velocity"});
  const double value = param(p, "value", 0.0);
  const double velocity = param(p, "velocity", 0.0);
  Interval window{-R, R};
  auto data = make_initial_data([value](double) { return value; },
                                [velocity](double) { return velocity; }, Regularity::W1infLinf,
                                window, 1e-3, "constant");
  return {"constant", std::move(data), window, std::nullopt};
}

}  // namespace

Preset make_preset(const std::string& name, const PresetParams& params, double R,
                   std::uint64_t seed) {
  if (!(R >= 0.5)) throw InvalidArgument("preset window half-width must be at least 0.5");
  if (name == "ode") return ode(params, R);
  if (name == "tilted") return tilted(params, R);
  if (name == "perturbed-ode") return perturbed_ode(params, R);
  if (name == "random-band-limited") return random_band_limited(params, R, seed);
  if (name == "constant") return constant(params, R);
  throw InvalidArgument("unknown preset: " + name);
}

Preset load_csv_preset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open initial data file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("empty initial data file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  if (line != "x,u0,u1") throw InvalidArgument("initial data CSV header must be x,u0,u1");

  auto xs = std::make_shared<std::vector<double>>();
  auto u0s = std::make_shared<std::vector<double>>();
  auto u1s = std::make_shared<std::vector<double>>();
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    ls.imbue(std::locale::classic());
    double x, a, b;
    char c1, c2;
    if (!(ls >> x >> c1 >> a >> c2 >> b) || c1 != ',' || c2 != ',')
      throw InvalidArgument("malformed initial data row " + std::to_string(row));
    if (!xs->empty() && !(x > xs->back()))
      throw InvalidArgument("initial data x must be strictly increasing (row " + std::to_string(row) + ")");
    xs->push_back(x);
    u0s->push_back(a);
    u1s->push_back(b);
  }
  if (xs->size() < 3) throw InvalidArgument("initial data needs at least 3 rows");

  auto interp = [xs](std::shared_ptr<std::vector<double>> ys) {
    return [xs, ys](double x) {
      const auto& X = *xs;
      const double tol = 1e-12 * std::max(1.0, std::abs(x));
      if (x < X.front() - tol || x > X.back() + tol)
        throw InvalidArgument("sample outside CSV data range");
      auto it = std::upper_bound(X.begin(), X.end(), x);
      std::size_t k = it == X.begin() ? 0 : static_cast<std::size_t>(it - X.begin()) - 1;
      k = std::min(k, X.size() - 2);
      const double f = (x - X[k]) / (X[k + 1] - X[k]);
      return (*ys)[k] + std::clamp(f, 0.0, 1.0) * ((*ys)[k + 1] - (*ys)[k]);
    };
  };
  Interval window{xs->front(), xs->back()};
  // The norm needs one quadrature node of padding on each side.
  const double pad = 2e-3;
  Interval norm_window{window.lo + pad, window.hi - pad};
  if (norm_window.length() < 1.0) throw InvalidArgument("initial data must span at least a unit interval");
  auto data = make_initial_data(interp(u0s), interp(u1s), Regularity::H1L2, norm_window, 1e-3, "csv");
  return {"csv", std::move(data), window, std::nullopt};
}

}  // namespace blowup
