#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cec/topology.h"
#include "config.h"
#include "runner.h"

namespace {

using cec::tools::ExperimentConfig;

// Exit codes: 0 success, 1 a run or check failed, 2 bad input.
int RunCommand(const std::string& path, const std::string& out,
               const std::string& seeds, const std::string& algos, bool svg,
               bool timing, int threads) {
  ExperimentConfig config = cec::tools::load_config(path);
  if (!seeds.empty()) {
    config.seeds.clear();
    for (const std::string& s : cec::tools::split_list(seeds)) {
      try {
        size_t used = 0;
        config.seeds.push_back(std::stoull(s, &used));
        if (used != s.size()) throw std::invalid_argument(s);
      } catch (const std::exception&) {
        throw cec::tools::ConfigError("--seeds", 0, "", "bad seed '" + s + "'");
      }
    }
  }
  if (!algos.empty()) {
    config.algorithms = cec::tools::split_list(algos);
  }
  cec::tools::RunOptions options;
  options.out_dir = out;
  options.svg = svg;
  options.timing = timing;
  options.threads = threads;
  cec::tools::RunReport report =
      cec::tools::run_experiment(config, options, std::cerr);
  for (const auto& cell : report.cells) {
    if (!cell.ok) {
      std::cerr << "failed: seed " << cell.seed << " " << cell.algo << ": "
                << cell.error << "\n";
    }
  }
  std::cout << report.cells.size() << " runs, " << report.files.size()
            << " files written to "
            << (out.empty() ? config.output : out) << "\n";
  return report.ok ? 0 : 1;
}

int VerifyCommand(const std::string& path) {
  const ExperimentConfig config = cec::tools::load_config(path);
  bool ok = true;
  for (const auto& check : cec::tools::verify_experiment(config)) {
    std::cout << (check.pass ? "PASS " : "FAIL ") << check.name << ": "
              << check.detail << "\n";
    ok = ok && check.pass;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint DNN workload allocation and routing experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir, seeds, algos;
  bool svg = false;
  bool timing = false;
  int threads = 0;
  auto* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("--out", out_dir, "Output directory (overrides config)");
  run->add_option("--seeds", seeds, "Comma-separated seeds, e.g. 1,2,3");
  run->add_option("--algos", algos,
                  "Comma-separated subset of omd_rt,pgd,opt,gs_oma,omad");
  run->add_flag("--svg", svg, "Also write SVG line charts");
  run->add_flag("--timing", timing, "Write measured wall_ms in summary.csv");
  run->add_option("--threads", threads, "Worker count (default CEC_THREADS)");

  std::string name;
  auto* topology = app.add_subcommand("topology", "Topology utilities");
  topology->require_subcommand(1);
  auto* dump = topology->add_subcommand("dump", "Print a named topology");
  dump->add_option("name", name, "abilene | balanced_tree | fog | geant")
      ->required();

  std::string verify_path;
  auto* verify = app.add_subcommand("verify", "Run the invariant suite");
  verify->add_option("config", verify_path, "Config file")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) {
      return RunCommand(config_path, out_dir, seeds, algos, svg, timing, threads);
    }
    if (dump->parsed()) {
      cec::save_topology(
          cec::load_named_topology(cec::parse_named_topology(name)), std::cout);
      return 0;
    }
    if (verify->parsed()) return VerifyCommand(verify_path);
  } catch (const cec::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
