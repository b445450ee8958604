// banach_oc: experiment runner for the Amari neural field and the LQ validation system.
//
//   banach_oc simulate --config run.cfg --out out/
//   banach_oc optimize --method monotone
//   banach_oc compare --out fig1/
//   banach_oc selftest --seed 3

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "banach_oc/experiment.hpp"
#include "banach_oc/selftest.hpp"

namespace {

using namespace banach_oc;

struct CommonFlags {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::string> method;
  std::optional<unsigned long> seed;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_method) {
  cmd->add_option("--config", flags.config, "key = value configuration file");
  cmd->add_option("--out", flags.out, "output directory");
  if (with_method) cmd->add_option("--method", flags.method, "pmp | monotone | both");
  cmd->add_option("--seed", flags.seed, "random seed");
}

ExperimentConfig resolve(const CommonFlags& flags) {
  ExperimentConfig cfg = flags.config.empty() ? ExperimentConfig{} : load_config(flags.config);
  if (flags.out) cfg.out = *flags.out;
  if (flags.method) cfg.method = parse_method(*flags.method);
  if (flags.seed) cfg.seed = *flags.seed;
  return cfg;
}

void save_effective(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.out);
  std::ofstream(std::filesystem::path(cfg.out) / "config.effective") << write_config(cfg);
}

void print_summary(const OptimizeResult& res) {
  std::cout << "baseline (u = 0): total " << res.baseline.total << "\n";
  for (const auto& m : res.methods) {
    std::cout << m.method << ": iterations " << m.iterations << ", total " << m.cost.total << " (terminal "
              << m.cost.terminal << ", energy " << m.cost.energy << "), " << m.wall_ms << " ms, stop " << m.stop
              << "\n";
  }
  std::cout << "monotone: " << (res.monotone ? "yes" : "NO") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Indirect descent methods for control-affine systems"};
  app.require_subcommand(1);

  CommonFlags sim_flags, opt_flags, cmp_flags, self_flags;
  auto* simulate = app.add_subcommand("simulate", "integrate under a control file (or zero control)");
  add_common(simulate, sim_flags, false);
  auto* optimize = app.add_subcommand("optimize", "run the selected descent method(s) from u = 0");
  add_common(optimize, opt_flags, true);
  auto* compare = app.add_subcommand("compare", "run both methods and write merged profiles and controls");
  add_common(compare, cmp_flags, false);
  auto* selftest = app.add_subcommand("selftest", "run the invariant checks");
  add_common(selftest, self_flags, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      const ExperimentConfig cfg = resolve(sim_flags);
      save_effective(cfg);
      const SimulateResult res = run_simulate(cfg);
      std::cout << "terminal " << res.cost.terminal << ", energy " << res.cost.energy << ", total " << res.cost.total
                << "\n";
      return 0;
    }
    if (optimize->parsed()) {
      const ExperimentConfig cfg = resolve(opt_flags);
      save_effective(cfg);
      const OptimizeResult res = run_optimize(cfg);
      print_summary(res);
      return res.monotone ? 0 : 1;
    }
    if (compare->parsed()) {
      const ExperimentConfig cfg = resolve(cmp_flags);
      save_effective(cfg);
      const OptimizeResult res = run_compare(cfg);
      print_summary(res);
      return res.monotone ? 0 : 1;
    }
    if (selftest->parsed()) {
      const ExperimentConfig cfg = resolve(self_flags);
      return run_selftest(cfg.seed, std::cout) ? 0 : 1;
    }
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
