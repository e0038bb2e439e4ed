#ifndef CEC_TOOLS_CONFIG_H
#define CEC_TOOLS_CONFIG_H

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "cec/allocate.h"
#include "cec/errors.h"
#include "cec/scenario.h"
#include "cec/utility.h"

namespace cec::tools {

// Parse or validation failure. line() is 0 when not tied to a line.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(std::string source, int line, std::string field,
              const std::string& message);
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

// Member defaults are the committed defaults file (data/defaults.cfg).
struct ExperimentConfig {
  std::string topology = "er";
  int er_nodes = 25;
  double er_probability = 0.2;
  std::vector<int> network_sizes;  // non-empty: sweep er_nodes over these
  double mean_capacity = 10.0;
  int sessions = 3;
  double total_rate = 60.0;
  std::uint64_t topology_seed = 0;
  std::uint64_t capacity_seed = 1000;
  std::uint64_t placement_seed = 2000;
  std::string cost = "exp";
  double cost_coeff = 1.0;
  std::string utility = "log";
  std::vector<double> a_w = {10.0, 15.0, 20.0};
  std::vector<double> b_w = {0.1, 0.1, 0.1};
  std::vector<std::string> algorithms = {"omd_rt", "pgd", "opt", "gs_oma",
                                         "omad"};
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  int routing_iterations = 1000;
  double routing_step = 1.0;
  double routing_tolerance = 1e-10;
  double pgd_step = 1.0;
  int alloc_iterations = 200;
  double alloc_step = 1.0;
  double alloc_delta = 0.0;  // 0 selects 0.01 * total_rate
  double alloc_tolerance = 1e-6;
  double probe_tolerance = 1e-8;  // OMD-RT tolerance inside GS-OMA probes
  bool lyapunov = false;
  int switch_iteration = 0;  // > 0 adds the topology-change experiment
  std::uint64_t switch_seed_offset = 100;
  std::string output = "out";

  bool operator==(const ExperimentConfig&) const = default;
};

inline const std::vector<std::string>& known_algorithms() {
  static const std::vector<std::string> names = {"omd_rt", "pgd", "opt",
                                                 "gs_oma", "omad"};
  return names;
}

// Starts from ExperimentConfig{} and applies every "key = value" line.
// `source` names the input in diagnostics.
ExperimentConfig parse_config(std::string_view text,
                              const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

// Every field, one per line, in a form parse_config reads back unchanged.
void write_config(const ExperimentConfig& config, std::ostream& out);

// Cross-field checks; throws ConfigError naming the field.
void validate_config(const ExperimentConfig& config);

// Comma-separated list such as "1,2,3" or "omd_rt,opt".
std::vector<std::string> split_list(std::string_view text);

InstanceSpec instance_spec(const ExperimentConfig& config, int er_nodes);
UtilityOracle make_oracle(const ExperimentConfig& config);
RoutingSolverConfig routing_config(const ExperimentConfig& config);
AllocSolverConfig alloc_config(const ExperimentConfig& config);

}  // namespace cec::tools

#endif  // CEC_TOOLS_CONFIG_H
