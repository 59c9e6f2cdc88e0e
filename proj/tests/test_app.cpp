#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>

#include <gtest/gtest.h>
#include <json.hpp>

#include "blowup/config.hpp"
#include "blowup/io.hpp"
#include "blowup/pipeline.hpp"

using namespace blowup;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("blowup_test_app_" + name);
  fs::remove_all(p);
  return p;
}

std::map<std::string, std::string> read_dir(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = read_text(e.path());
  return out;
}

RunConfig quick(const std::string& preset, double h) {
  json j = {{"preset", preset}, {"grid", {{"h", h}}}, {"picard", {{"h", 0.02}}}};
  if (preset == "tilted") j["params"] = {{"kappa", 0.5}};
  return parse_config(j);
}

RunOptions opts(const fs::path& out) {
  RunOptions o;
  o.jobs = 2;
  o.timestamp = false;
  o.out = out.string();
  return o;
}

}  // namespace

TEST(Config, Defaults) {
  const RunConfig c = parse_config(json{{"preset", "ode"}});
  EXPECT_EQ(c.preset, "ode");
  EXPECT_DOUBLE_EQ(c.h, 1e-3);
  EXPECT_TRUE(c.auto_targets);
  EXPECT_TRUE(c.refine);
  EXPECT_EQ(c.checks, check_names());
}

TEST(Config, RejectsUnknownKeys) {
  EXPECT_THROW(parse_config(json{{"preset", "ode"}, {"gird", {{"h", 1e-3}}}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"preset", "ode"}, {"grid", {{"dx", 1e-3}}}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"preset", "ode"}, {"picard", {{"steps", 3}}}}), ConfigError);
}

TEST(Config, RejectsBadValues) {
  EXPECT_THROW(parse_config(json::object()), ConfigError);
  EXPECT_THROW(parse_config(json{{"preset", "nope"}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"preset", "ode"}, {"grid", {{"h", -1.0}}}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"preset", "ode"}, {"grid", {{"h", 0.0}}}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"preset", "ode"}, {"checks", {"bogus"}}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"preset", "ode"}, {"targets", "some"}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"preset", "ode"}, {"dump_format", "hdf5"}}), ConfigError);
}

TEST(Config, TargetsAndChecks) {
  const RunConfig c =
      parse_config(json{{"preset", "ode"}, {"targets", {0.0, 0.25}}, {"checks", {"upper_pointwise"}}});
  EXPECT_FALSE(c.auto_targets);
  EXPECT_EQ(c.targets, (std::vector<double>{0.0, 0.25}));
  EXPECT_EQ(c.checks, (std::vector<std::string>{"upper_pointwise"}));
  EXPECT_TRUE(parse_config(json{{"preset", "ode"}, {"checks", "none"}}).checks.empty());
}

TEST(Config, RoundTrip) {
  const RunConfig c = parse_config(json{{"preset", "tilted"},
                                        {"params", {{"kappa", 0.25}}},
                                        {"grid", {{"h", 2e-3}, {"R", 1.5}}},
                                        {"targets", {0.1}},
                                        {"seed", 7},
                                        {"similarity", {{"ny", 101}}}});
  const json j = to_json(c);
  EXPECT_EQ(to_json(parse_config(j)), j);
}

TEST(Config, InvalidFileWritesNothing) {
  const fs::path dir = scratch("invalid");
  fs::create_directories(dir);
  const fs::path file = dir / "bad.json";
  write_text(file, R"({"preset": "ode", "grid": {"h": -1}, "out": ")" + (dir / "out").string() + "\"}");
  EXPECT_THROW(load_config(file.string()), ConfigError);
  EXPECT_FALSE(fs::exists(dir / "out"));
  write_text(file, "{not json");
  EXPECT_THROW(load_config(file.string()), ConfigError);
}

TEST(Io, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 12.0, 6.02214076e23})
    EXPECT_EQ(std::stod(format_double(v)), v);
  EXPECT_EQ(format_double(12.0), "12");
  EXPECT_EQ(format_double(std::nan("")), "nan");
}

TEST(Io, Csv) {
  const fs::path dir = scratch("csv");
  fs::create_directories(dir);
  write_csv(dir / "a.csv", {"x", "y"}, {{1.0, 0.5}, {2.0, -0.25}});
  EXPECT_EQ(read_text(dir / "a.csv"), "x,y\n1,0.5\n2,-0.25\n");
  EXPECT_THROW(write_csv(dir / "b.csv", {"x", "y"}, {{1.0}}), InvalidArgument);
}

TEST(Io, Sha256KnownVector) {
  const fs::path dir = scratch("sha");
  fs::create_directories(dir);
  write_text(dir / "abc", "abc");
  EXPECT_EQ(sha256_file(dir / "abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Io, SvgTimestampOptional) {
  const std::vector<SvgSeries> s{{{0.0, 1.0}, {0.0, 1.0}}};
  EXPECT_EQ(svg_plot("t", "x", "y", s).find("<!--"), std::string::npos);
  EXPECT_NE(svg_plot("t", "x", "y", s, "2026-01-01T00:00:00Z").find("2026-01-01"), std::string::npos);
  EXPECT_EQ(svg_plot("t", "x", "y", s), svg_plot("t", "x", "y", s));
}

TEST(Io, BinaryDumpLayout) {
  const RunConfig c = quick("ode", 0.05);
  const Preset p = config_preset(c);
  const SolveOutcome run =
      solve(p.data, SourceTerm::exponential(), Grid::covering(p.window, c.h, 10), c.u_max, 0.5);
  const fs::path dir = scratch("bin");
  fs::create_directories(dir);
  dump_field_binary(dir / "f.json", dir / "f.bin", run, 2);
  const json header = json::parse(read_text(dir / "f.json"));
  const int nx = header["nx"];
  const auto levels = header["levels"].get<std::vector<int>>();
  const std::string bytes = read_text(dir / "f.bin");
  ASSERT_EQ(bytes.size(), 8u * nx * levels.size());
  double v;
  const std::size_t k = 1, i = nx / 2;
  std::memcpy(&v, bytes.data() + 8 * (k * nx + i), 8);
  EXPECT_EQ(v, run.field.u(levels[k], static_cast<int>(i)));
}

TEST(AutoTargets, ConesStayUnderCurve) {
  std::vector<double> xs, Ts;
  for (int j = 0; j <= 250; ++j) {
    xs.push_back(-1.25 + 0.01 * j);
    Ts.push_back(1.0 + 0.01 * std::abs(xs.back()));
  }
  const BlowupCurve curve = BlowupCurve::from_samples(xs, Ts, 1e-3);
  const auto targets = auto_targets(curve);
  ASSERT_FALSE(targets.empty());
  EXPECT_NEAR(targets.front(), 0.0, 1e-12);
  for (double a : targets) {
    EXPECT_GE(a - curve.T_at(a), -1.25 - 1e-12);
    EXPECT_LE(a + curve.T_at(a), 1.25 + 1e-12);
  }
  EXPECT_TRUE(auto_targets(BlowupCurve{}).empty());
}

class PipelineRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(scratch("ode"));
    result_ = new RunResult(run(quick("ode", 4e-3), opts(*dir_)));
  }
  static void TearDownTestSuite() {
    delete result_;
    delete dir_;
  }
  static fs::path* dir_;
  static RunResult* result_;
};

fs::path* PipelineRun::dir_ = nullptr;
RunResult* PipelineRun::result_ = nullptr;

TEST_F(PipelineRun, OdeAllChecksPass) {
  EXPECT_EQ(result_->exit_code, 0) << summary_table(result_->report);
  EXPECT_TRUE(result_->manifest["errors"].empty()) << result_->manifest["errors"].dump();
  for (const auto& c : result_->report) EXPECT_TRUE(c["passed"].get<bool>()) << c.dump();
}

TEST_F(PipelineRun, ManifestListsArtifactsWithChecksums) {
  std::map<std::string, std::string> listed;
  for (const auto& f : result_->manifest["files"]) listed[f["path"]] = f["sha256"];
  for (const char* name : {"curve.csv", "energy.csv", "report.json", "summary.json", "frame.csv"})
    EXPECT_TRUE(listed.count(name)) << name;
  for (const auto& [name, sum] : listed) EXPECT_EQ(sha256_file(*dir_ / name), sum) << name;
  EXPECT_FALSE(result_->manifest.contains("created"));
  EXPECT_EQ(load_manifest(*dir_), result_->manifest);
}

TEST_F(PipelineRun, RerunIsByteIdentical) {
  const auto before = read_dir(*dir_);
  const RunResult again = run(quick("ode", 4e-3), opts(*dir_));
  EXPECT_EQ(again.exit_code, 0);
  EXPECT_EQ(read_dir(*dir_), before);
}

TEST_F(PipelineRun, TimestampOnlyWhenRequested) {
  const fs::path dir = scratch("stamped");
  RunOptions o = opts(dir);
  o.timestamp = true;
  RunConfig c = quick("ode", 4e-3);
  c.checks.clear();
  const RunResult r = check(c, o);
  EXPECT_TRUE(r.manifest.contains("created"));
}

TEST_F(PipelineRun, CompareOrders) {
  const fs::path fine_dir = scratch("ode_fine");
  const RunResult fine = run(quick("ode", 2e-3), opts(fine_dir));
  ASSERT_EQ(fine.exit_code, 0);
  const json cmp = compare(result_->manifest, fine.manifest);
  EXPECT_FALSE(cmp["degenerate"].get<bool>());
  EXPECT_GE(cmp["t_estimate"]["order"].get<double>(), 0.9);

  const json same = compare(result_->manifest, result_->manifest);
  EXPECT_TRUE(same["degenerate"].get<bool>());
  EXPECT_TRUE(same["t_estimate"]["order"].is_null());
}

TEST_F(PipelineRun, CompareRejectsMismatchedPresets) {
  const fs::path dir = scratch("tilted");
  RunConfig c = quick("tilted", 4e-3);
  c.checks.clear();
  const RunResult other = check(c, opts(dir));
  try {
    compare(result_->manifest, other.manifest);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("mismatched presets"), std::string::npos);
  }
}

TEST(Pipeline, CheckSubsetAndUnknownTargetsReported) {
  RunConfig c = quick("ode", 4e-3);
  c.auto_targets = false;
  c.targets = {0.0};
  c.checks = {"upper_pointwise", "w1inf_rate"};
  const RunResult r = check(c, opts(scratch("subset")));
  ASSERT_EQ(r.report.size(), 2u);
  EXPECT_EQ(r.exit_code, 0);
  for (const auto& k : r.report) EXPECT_TRUE(k["passed"].get<bool>()) << k.dump();
}
