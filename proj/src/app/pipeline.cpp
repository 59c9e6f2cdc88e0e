#include "blowup/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <functional>

#include "blowup/io.hpp"
#include "blowup/picard.hpp"
#include "blowup/similarity.hpp"

#ifndef BLOWUP_VERSION
#define BLOWUP_VERSION "0.0.0"
#endif

namespace blowup {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json optional_number(const std::optional<double>& v) { return v ? number_or_null(*v) : json(nullptr); }

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::vector<double> auto_targets(const BlowupCurve& curve) {
  if (curve.size() == 0) return {};
  // Only samples whose backward cone base lies under the sampled curve.
  const Interval span = curve.span();
  std::vector<std::size_t> ok;
  for (std::size_t j = 0; j < curve.size(); ++j)
    if (curve.xs[j] - curve.Ts[j] >= span.lo && curve.xs[j] + curve.Ts[j] <= span.hi) ok.push_back(j);
  if (ok.empty())
    for (std::size_t j = 0; j < curve.size(); ++j) ok.push_back(j);

  std::size_t best = ok.front();
  for (std::size_t j : ok)
    if (curve.Ts[j] < curve.Ts[best]) best = j;
  std::vector<double> out{curve.xs[best]};
  const double lo = curve.xs[ok.front()], hi = curve.xs[ok.back()];
  for (double q : {0.25, 0.75}) {
    const double x = lo + q * (hi - lo);
    std::size_t near = ok.front();
    for (std::size_t j : ok)
      if (std::abs(curve.xs[j] - x) < std::abs(curve.xs[near] - x)) near = j;
    if (std::find(out.begin(), out.end(), curve.xs[near]) == out.end()) out.push_back(curve.xs[near]);
  }
  return out;
}

json to_json(const BoundCheck& c) {
  json j;
  j["name"] = c.name;
  j["passed"] = c.passed;
  j["applicable"] = c.applicable;
  j["measured_constant"] = number_or_null(c.measured_constant);
  j["fine_constant"] = optional_number(c.fine_constant);
  j["refinement_order"] = optional_number(c.refinement_order);
  j["bound_form"] = c.bound_form;
  j["notes"] = c.notes;
  json extras = json::object();
  for (const auto& [k, v] : c.extras) extras[k] = number_or_null(v);
  j["extras"] = extras;
  json q = json::array();
  for (double v : c.quantity) q.push_back(number_or_null(v));
  j["quantity"] = q;
  return j;
}

std::string summary_table(const json& report) {
  std::string s;
  char line[256];
  std::snprintf(line, sizeof line, "%-36s %-6s %14s %14s %8s\n", "check", "status", "constant", "fine", "order");
  s += line;
  for (const auto& c : report) {
    const char* status = !c["applicable"].get<bool>() ? "n/a" : c["passed"].get<bool>() ? "PASS" : "FAIL";
    auto num = [](const json& v, const char* f) {
      char b[32];
      if (v.is_null()) return std::string("-");
      std::snprintf(b, sizeof b, f, v.get<double>());
      return std::string(b);
    };
    std::snprintf(line, sizeof line, "%-36s %-6s %14s %14s %8s\n", c["name"].get<std::string>().c_str(), status,
                  num(c["measured_constant"], "%.6g").c_str(), num(c["fine_constant"], "%.6g").c_str(),
                  num(c["refinement_order"], "%.2f").c_str());
    s += line;
    if (!c["notes"].get<std::string>().empty()) s += "    " + c["notes"].get<std::string>() + "\n";
  }
  return s;
}

namespace {

class Pipeline {
 public:
  Pipeline(const RunConfig& cfg, const RunOptions& opt) : cfg_(cfg), opt_(opt) {}

  RunResult execute(bool full) {
    // Everything that can reject the configuration happens before the
    // output directory is touched.
    const Preset preset = config_preset(cfg_);
    dir_ = opt_.out.value_or(cfg_.out);
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw ConfigError("output directory not writable: " + dir_.string());
    if (opt_.timestamp) created_ = utc_now();

    summary_["preset"] = preset.name;
    summary_["params"] = json::object();
    for (const auto& [k, v] : cfg_.params) summary_["params"][k] = v;
    summary_["seed"] = cfg_.seed;
    summary_["h"] = cfg_.h;
    summary_["h_fine"] = cfg_.refine ? json(0.5 * cfg_.h) : json(nullptr);

    stage("solve", [&] { solve_stage(preset); });
    stage("geometry", [&] { geometry_stage(); });
    if (full) stage("similarity", [&] { similarity_stage(); });
    if (full && cfg_.picard.enabled) stage("picard", [&] { picard_stage(); });
    if (!cfg_.checks.empty()) stage("checks", [&] { checks_stage(); });
    if (full) stage("cone_energy", [&] { cone_energy_stage(); });
    if (cfg_.dump_every > 0) stage("dump", [&] { dump_stage(); });
    return finish();
  }

 private:
  void stage(const std::string& name, const std::function<void()>& fn) {
    if (opt_.log) *opt_.log << "[" << name << "]" << std::endl;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn();
    } catch (const std::exception& e) {
      errors_.push_back({{"stage", name}, {"message", e.what()}});
      if (opt_.log) *opt_.log << "  error: " << e.what() << std::endl;
    }
    timing_[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  void emit(const std::string& name) { files_.push_back(name); }

  void write_json(const std::string& name, const json& j) {
    write_text(dir_ / name, j.dump(2) + "\n");
    emit(name);
  }

  void write_svg(const std::string& name, const std::string& svg) {
    write_text(dir_ / name, svg);
    emit(name);
  }

  const VerifyRun& coarse() const {
    if (!coarse_) throw Error("solve stage did not complete");
    return *coarse_;
  }

  const VerifyRun& curve_run() const {
    const VerifyRun& r = coarse();
    if (!r.has_curve) throw Error(r.curve_error);
    return r;
  }

  void solve_stage(const Preset& preset) {
    VerifyOptions vo;
    vo.t_end = cfg_.t_end;
    vo.u_max = cfg_.u_max;
    vo.curve_dx = cfg_.curve_dx;
    vo.exact_gamma = cfg_.exact_gamma;
    vo.gap_cells = cfg_.similarity.min_gap_cells;
    coarse_ = make_verify_run(preset, cfg_.h, vo);
    if (cfg_.refine) fine_ = make_verify_run(preset, 0.5 * cfg_.h, vo);
    summary_["stop_reason"] = to_string(coarse_->outcome.stopped_reason);
    summary_["max_level"] = coarse_->outcome.max_level;
  }

  static double t_error(const VerifyRun& r) {
    if (!r.exact || r.estimated.size() == 0) return std::numeric_limits<double>::quiet_NaN();
    double e = 0.0;
    for (std::size_t j = 0; j < r.estimated.size(); ++j)
      e = std::max(e, std::abs(r.estimated.Ts[j] - r.exact->blowup_time(r.estimated.xs[j])));
    return e;
  }

  void geometry_stage() {
    if (!cfg_.auto_targets) targets_ = cfg_.targets;
    const VerifyRun& r = curve_run();
    const BlowupCurve& c = r.curve;
    if (cfg_.auto_targets) targets_ = auto_targets(c);

    std::vector<std::vector<double>> rows;
    for (std::size_t j = 0; j < c.size(); ++j) {
      double delta = std::numeric_limits<double>::quiet_NaN(), nonchar = 0.0;
      try {
        const auto t = noncharacteristic_test(c, c.xs[j]);
        delta = t.delta_min;
        nonchar = t.is_noncharacteristic ? 1.0 : 0.0;
      } catch (const InvalidArgument&) {
      }
      rows.push_back({c.xs[j], c.Ts[j], delta, nonchar});
    }
    write_csv(dir_ / "curve.csv", {"x", "T", "delta_min", "noncharacteristic"}, rows);
    emit("curve.csv");

    const auto it = std::min_element(c.Ts.begin(), c.Ts.end());
    json cj;
    cj["samples"] = c.size();
    cj["span"] = {c.span().lo, c.span().hi};
    cj["method"] = to_string(c.method);
    cj["exact_gamma"] = r.exact_gamma;
    cj["T_min"] = *it;
    cj["argmin"] = c.xs[static_cast<std::size_t>(it - c.Ts.begin())];
    cj["lipschitz_defect"] = c.lipschitz_defect;
    cj["lipschitz_accepted"] = c.lipschitz_accepted();
    cj["t_error"] = number_or_null(t_error(r));
    cj["t_error_fine"] = fine_ ? number_or_null(t_error(*fine_)) : json(nullptr);
    summary_["curve"] = cj;

    json tj = json::array();
    std::vector<SvgSeries> series{{c.xs, c.Ts, "#1f77b4", "T(x)", false}};
    for (double a : targets_) {
      json t{{"a", a}};
      try {
        const double T = c.T_at(a);
        t["T"] = T;
        const auto nc = noncharacteristic_test(c, a);
        t["delta_min"] = nc.delta_min;
        t["noncharacteristic"] = nc.is_noncharacteristic;
        series.push_back({{a - T, a, a + T}, {0.0, T, 0.0}, "#d62728", "", true});
      } catch (const Error& e) {
        t["error"] = e.what();
      }
      tj.push_back(t);
    }
    summary_["targets"] = tj;
    write_svg("curve.svg", svg_plot("blow-up curve", "x", "t", series, created_));
  }

  void similarity_stage() {
    const VerifyRun& r = curve_run();
    if (targets_.empty()) throw Error("no analysis target");
    const double a = targets_.front(), T = r.T_at(a);
    SimilarityOptions so;
    so.y_margin = cfg_.similarity.y_margin;
    so.levels_per_unit_s = cfg_.similarity.levels_per_unit_s;
    so.ny = cfg_.similarity.ny;
    if (cfg_.similarity.s_max) so.s_max = *cfg_.similarity.s_max;
    so.min_gap_cells = cfg_.similarity.min_gap_cells;
    const auto fr = to_similarity(r.outcome, a, T, so);

    std::vector<std::vector<double>> rows;
    for (int k = 0; k < fr.ns(); ++k)
      for (int j = 0; j < fr.ny(); ++j) rows.push_back({fr.s_grid[k], fr.y_grid[j], fr.W(k, j), fr.Ws(k, j), fr.Wy(k, j)});
    write_csv(dir_ / "frame.csv", {"s", "y", "w", "ws", "wy"}, rows);
    emit("frame.csv");

    const auto tr = energy_trace(fr);
    rows.clear();
    for (std::size_t k = 0; k < tr.s.size(); ++k) rows.push_back({tr.s[k], tr.E[k], tr.flux[k], tr.residual[k]});
    write_csv(dir_ / "energy.csv", {"s", "E", "flux", "residual"}, rows);
    emit("energy.csv");

    // Equation residual on its own frame: spacing of order sqrt(h), away
    // from Gamma (T - t >= 0.05).
    const double d = 0.8 * std::sqrt(r.h);
    SimilarityOptions ro = so;
    ro.levels_per_unit_s = 1.0 / d;
    ro.ny = 2 * static_cast<int>(std::lround((1.0 - so.y_margin) / d)) + 1;
    ro.s_max = std::min(so.s_max, -std::log(0.05));
    const double residual = equation_residual(to_similarity(r.outcome, a, T, ro));

    json sj;
    sj["a"] = a;
    sj["T"] = T;
    sj["ns"] = fr.ns();
    sj["ny"] = fr.ny();
    sj["truncated"] = fr.truncated;
    sj["s_range"] = {fr.s_grid.front(), fr.s_grid.back()};
    sj["residual"] = residual;
    sj["residual_spacing"] = d;
    sj["E_first"] = tr.E.front();
    sj["E_last"] = tr.E.back();
    sj["max_energy_increase"] = max_energy_increase(tr);
    sj["dissipation_defect"] = dissipation_identity(tr, tr.s.front(), tr.s.back());
    sj["quadrature_error"] = dissipation_quadrature_error(tr, tr.s.front(), tr.s.back());
    summary_["similarity"] = sj;

    std::vector<SvgSeries> profiles;
    const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"};
    for (int q = 0; q < 4; ++q) {
      const int k = q * (fr.ns() - 1) / 3;
      SvgSeries s;
      s.color = colors[q];
      char label[32];
      std::snprintf(label, sizeof label, "s = %.2f", fr.s_grid[k]);
      s.label = label;
      for (int j = 0; j < fr.ny(); ++j) {
        s.x.push_back(fr.y_grid[j]);
        s.y.push_back(fr.W(k, j));
      }
      profiles.push_back(s);
    }
    write_svg("w_profiles.svg", svg_plot("similarity profiles", "y", "w", profiles, created_));
    write_svg("energy.svg", svg_plot("Lyapunov functional", "s", "E", {{tr.s, tr.E, "#1f77b4", "E(s)", false}}, created_));
  }

  void picard_stage() {
    const Preset p = config_preset(cfg_, cfg_.picard.R);
    const int levels = static_cast<int>(std::floor(cfg_.picard.t_local / cfg_.picard.h + 1e-9));
    const Grid g = Grid::covering(p.window, cfg_.picard.h, levels + 1);
    PicardConfig pc;
    pc.t_local = cfg_.picard.t_local;
    const auto pr = picard_solve(p.data, g, pc);
    const auto out = solve(p.data, SourceTerm::exponential(), g, cfg_.u_max, pr.T_local);
    double diff = 0.0;
    for (int n = 0; n < static_cast<int>(pr.trajectory.size()); ++n)
      for (int q = 0; q < pr.trajectory[n].size(); ++q)
        if (out.field.valid(n, q + n)) diff = std::max(diff, std::abs(out.field.u(n, q + n) - pr.trajectory[n].u[q]));
    json j;
    j["h"] = cfg_.picard.h;
    j["window"] = {p.window.lo, p.window.hi};
    j["T_local"] = pr.T_local;
    j["T_formula"] = pr.T_formula;
    j["iterations"] = pr.iterations;
    j["halvings"] = pr.halvings;
    j["contraction_estimate"] = pr.contraction_estimate;
    j["contraction_bound"] = number_or_null(pr.contraction_bound);
    j["radius"] = pr.radius;
    j["fixed_point_defect"] = pr.fixed_point_defect;
    j["max_diff_vs_solver"] = diff;
    summary_["picard"] = j;
  }

  void checks_stage() {
    const VerifyRun& c = coarse();
    const VerifyRun& f = fine_ ? *fine_ : c;
    const auto checks = run_checks(c, f, targets_, cfg_.checks, opt_.jobs);
    report_ = json::array();
    int passed = 0, failed = 0, na = 0;
    json constants = json::object();
    for (const auto& k : checks) {
      report_.push_back(to_json(k));
      if (!k.applicable) ++na;
      else if (k.passed) ++passed;
      else ++failed;
      constants[k.name] = {{"measured", number_or_null(k.measured_constant)},
                           {"fine", optional_number(k.fine_constant)}};
    }
    failed_checks_ = failed;
    summary_["checks"] = {{"requested", checks.size()}, {"passed", passed}, {"failed", failed},
                          {"not_applicable", na}, {"refined", fine_.has_value()}};
    summary_["constants"] = constants;
    write_json("report.json", report_);
  }

  void cone_energy_stage() {
    const VerifyRun& r = curve_run();
    if (targets_.empty()) throw Error("no analysis target");
    const auto ce = cone_energy_trace(r, targets_.front());
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < ce.t.size(); ++k) rows.push_back({ce.t[k], ce.E_a[k], ce.flux_bound[k]});
    write_csv(dir_ / "cone_energy.csv", {"t", "E_a", "flux_bound"}, rows);
    emit("cone_energy.csv");
  }

  void dump_stage() {
    const SolveOutcome& out = coarse().outcome;
    if (cfg_.dump_format == "csv") {
      dump_field_csv(dir_ / "field.csv", out, cfg_.dump_every);
      emit("field.csv");
    } else {
      dump_field_binary(dir_ / "field.json", dir_ / "field.bin", out, cfg_.dump_every);
      emit("field.json");
      emit("field.bin");
    }
  }

  RunResult finish() {
    summary_["errors"] = errors_;
    if (!summary_.contains("picard")) summary_["picard"] = nullptr;
    write_json("summary.json", summary_);

    json m;
    json config = to_json(cfg_);
    config["out"] = dir_.string();
    m["config"] = config;
    m["versions"] = {{"blowup", BLOWUP_VERSION}, {"compiler", __VERSION__}, {"json", "nlohmann " + std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
    if (opt_.timestamp) {
      m["created"] = created_;
      m["timing"] = timing_;
    }
    std::sort(files_.begin(), files_.end());
    json files = json::array();
    for (const auto& f : files_)
      files.push_back({{"path", f}, {"sha256", sha256_file(dir_ / f)}, {"bytes", fs::file_size(dir_ / f)}});
    m["files"] = files;
    m["errors"] = errors_;
    m["summary"] = summary_;
    RunResult res;
    res.exit_code = errors_.empty() && failed_checks_ == 0 ? 0 : 1;
    m["exit_code"] = res.exit_code;
    write_text(dir_ / "manifest.json", m.dump(2) + "\n");
    res.dir = dir_;
    res.manifest = std::move(m);
    res.report = report_;
    return res;
  }

  const RunConfig& cfg_;
  const RunOptions& opt_;
  fs::path dir_;
  std::string created_;
  std::optional<VerifyRun> coarse_, fine_;
  std::vector<double> targets_;
  json summary_ = json::object();
  json report_ = json::array();
  json errors_ = json::array();
  json timing_ = json::object();
  std::vector<std::string> files_;
  int failed_checks_ = 0;
};

}  // namespace

RunResult run(const RunConfig& config, const RunOptions& options) { return Pipeline(config, options).execute(true); }

RunResult check(const RunConfig& config, const RunOptions& options) {
  return Pipeline(config, options).execute(false);
}

json load_manifest(const fs::path& path) {
  const fs::path file = fs::is_directory(path) ? path / "manifest.json" : path;
  try {
    return json::parse(read_text(file));
  } catch (const json::parse_error& e) {
    throw Error("manifest is not valid JSON: " + file.string());
  }
}

json compare(const json& a, const json& b) {
  const json& sa = a.at("summary");
  const json& sb = b.at("summary");
  if (sa.at("preset") != sb.at("preset") || sa.at("params") != sb.at("params"))
    throw Error("mismatched presets");
  const double ha = sa.at("h").get<double>(), hb = sb.at("h").get<double>();
  const bool degenerate = ha == hb;

  auto value = [](const json& s, const std::vector<std::string>& path) -> std::optional<double> {
    const json* p = &s;
    for (const auto& k : path) {
      if (!p->is_object() || !p->contains(k)) return std::nullopt;
      p = &(*p)[k];
    }
    if (!p->is_number()) return std::nullopt;
    return p->get<double>();
  };
  auto order = [&](std::optional<double> ea, std::optional<double> eb) {
    json j;
    j["a"] = optional_number(ea);
    j["b"] = optional_number(eb);
    j["degenerate"] = degenerate;
    if (!degenerate && ea && eb && *ea > 0.0 && *eb > 0.0)
      j["order"] = std::log(*ea / *eb) / std::log(ha / hb);
    else
      j["order"] = nullptr;
    return j;
  };

  json out;
  out["preset"] = sa.at("preset");
  out["h"] = {ha, hb};
  out["degenerate"] = degenerate;
  out["t_estimate"] = order(value(sa, {"curve", "t_error"}), value(sb, {"curve", "t_error"}));
  out["residual"] = order(value(sa, {"similarity", "residual"}), value(sb, {"similarity", "residual"}));
  // Constants: the h versus h/2 change inside each run is the error proxy.
  json constants = json::object();
  if (sa.contains("constants") && sb.contains("constants"))
    for (const auto& [name, ca] : sa["constants"].items()) {
      if (!sb["constants"].contains(name)) continue;
      const json& cb = sb["constants"][name];
      auto gap = [](const json& c) -> std::optional<double> {
        if (!c["measured"].is_number() || !c["fine"].is_number()) return std::nullopt;
        return std::abs(c["measured"].get<double>() - c["fine"].get<double>());
      };
      json j = order(gap(ca), gap(cb));
      j["measured"] = {ca["measured"], cb["measured"]};
      constants[name] = j;
    }
  out["constants"] = constants;
  return out;
}

}  // namespace blowup
