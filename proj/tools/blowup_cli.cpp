#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "blowup/io.hpp"
#include "blowup/pipeline.hpp"

using namespace blowup;

namespace {

struct Flags {
  std::string config;
  std::string out;
  int jobs = 0;
  bool no_timestamp = false;
  int dump_every = -1;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "output directory (overrides the config)");
  cmd->add_option("--jobs", f.jobs, "worker threads for the checks (default: hardware threads)")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--no-timestamp", f.no_timestamp, "leave timestamps and timings out of the artifacts");
  cmd->add_option("--dump-every", f.dump_every, "dump every K-th level of the field (0 = off)")
      ->check(CLI::NonNegativeNumber);
}

int execute(const Flags& f, bool full) {
  RunConfig cfg = load_config(f.config);
  if (f.dump_every >= 0) cfg.dump_every = f.dump_every;
  RunOptions opt;
  opt.jobs = f.jobs > 0 ? f.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  opt.timestamp = !f.no_timestamp;
  if (!f.out.empty()) opt.out = f.out;
  opt.log = &std::cerr;
  const RunResult r = full ? run(cfg, opt) : check(cfg, opt);
  std::cout << summary_table(r.report);
  for (const auto& e : r.manifest["errors"])
    std::cout << "stage " << e["stage"].get<std::string>() << " failed: " << e["message"].get<std::string>() << "\n";
  std::cout << "artifacts in " << r.dir.string() << "\n";
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blow-up simulator and verification harness for u_tt = u_xx + e^u"};
  app.require_subcommand(1);

  Flags run_flags, check_flags;
  auto* run_cmd = app.add_subcommand("run", "solve, analyse, verify and write all artifacts");
  add_common(run_cmd, run_flags);
  auto* check_cmd = app.add_subcommand("check", "solve and run the verification checks only");
  add_common(check_cmd, check_flags);

  std::string a, b, cmp_out;
  auto* cmp = app.add_subcommand("compare", "observed convergence orders between two runs");
  cmp->add_option("first", a, "manifest.json or run directory")->required();
  cmp->add_option("second", b, "manifest.json or run directory")->required();
  cmp->add_option("--out", cmp_out, "directory for comparison.json");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return execute(run_flags, true);
    if (*check_cmd) return execute(check_flags, false);
    const auto result = compare(load_manifest(a), load_manifest(b));
    std::cout << result.dump(2) << "\n";
    if (!cmp_out.empty()) {
      std::filesystem::create_directories(cmp_out);
      write_text(std::filesystem::path(cmp_out) / "comparison.json", result.dump(2) + "\n");
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
