#ifndef CEC_TOOLS_RUNNER_H
#define CEC_TOOLS_RUNNER_H

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "config.h"

namespace cec::tools {

struct RunOptions {
  std::string out_dir;  // overrides config.output when non-empty
  bool svg = false;
  bool timing = false;  // write measured wall_ms instead of "-"
  int threads = 0;      // <= 0: CEC_THREADS, else hardware concurrency
};

struct CellResult {
  int nodes = 0;
  std::uint64_t seed = 0;
  std::string algo;
  bool ok = false;
  double final_value = 0.0;  // D for routing algorithms, U for allocation
  int iters = 0;
  double wall_ms = 0.0;
  std::string error;
};

struct RunReport {
  std::vector<CellResult> cells;
  std::vector<std::string> files;  // written, relative to the output dir
  bool ok = true;
};

// Worker count: `requested` if positive, else CEC_THREADS, else hardware
// concurrency; never more than `cells`, never less than 1.
int worker_count(int requested, int cells);

// Runs every (size, seed, algorithm) cell and writes the CSV bundle.
RunReport run_experiment(const ExperimentConfig& config,
                         const RunOptions& options, std::ostream& log);

struct VerifyCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Invariant suite on every configured instance; no files written.
std::vector<VerifyCheck> verify_experiment(const ExperimentConfig& config);

}  // namespace cec::tools

#endif  // CEC_TOOLS_RUNNER_H
