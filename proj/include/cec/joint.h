#ifndef CEC_JOINT_H
#define CEC_JOINT_H

#include <iosfwd>
#include <string>
#include <vector>

#include "cec/allocate.h"
#include "cec/scenario.h"

namespace cec {

// Single-loop state: Lambda and phi both persist across outer iterations.
struct JointState {
  Allocation allocation;
  RoutingConfig routing;
  int iteration = 0;
  double utility = 0.0;  // U(Lambda, phi) at the persisted pair
  double step = 0.0;     // eta for Lambda
};

struct JointTraceRow {
  int iter = 0;
  std::string algo;
  double utility = 0.0;
  double v1 = 0.0;
  double v2 = 0.0;
  double v = 0.0;
  std::string event;  // "" or "topology_switch"
  std::vector<double> rates;
};

struct JointResult {
  Allocation allocation;
  RoutingConfig routing;
  double utility = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<JointTraceRow> trace;  // row 0 is (Lambda^1, uniform phi)
};

// U(Lambda, phi) for a fixed routing. One query on `oracle`.
double joint_utility(const AugmentedGraph& graph,
                     const std::vector<SessionDag>& dags,
                     std::span<const double> rates, const RoutingConfig& routing,
                     const UtilityOracle& oracle, const LinkCostModel& cost);

JointState omad_start(const AugmentedGraph& graph,
                      const std::vector<SessionDag>& dags,
                      const UtilityOracle& monitor, const LinkCostModel& cost,
                      const Allocation& allocation,
                      const AllocParameters& params);

// One OMAD outer iteration. Each of the 2W probes runs one OMD-RT step from
// the persisted phi on a scratch copy; the persisted phi then takes one step
// at the unperturbed Lambda^t, and Lambda takes the mirror-ascent step.
// Returns the sup-norm change of Lambda.
double omad_iterate(const AugmentedGraph& graph,
                    const std::vector<SessionDag>& dags,
                    const UtilityOracle& oracle, const UtilityOracle& monitor,
                    const LinkCostModel& cost, const AllocParameters& params,
                    const AllocSolverConfig& config, JointState& state);

JointResult omad_solve(const AugmentedGraph& graph,
                       const std::vector<SessionDag>& dags,
                       const UtilityOracle& oracle, const LinkCostModel& cost,
                       double total_rate, const AllocSolverConfig& config);

// GS-OMA trace rows in the joint layout (algo "gs_oma").
std::vector<JointTraceRow> to_joint_trace(const std::vector<AllocTraceRow>& rows);

// Fills v1, v2, v on every row:
//   V1 = U* - max_phi U(Lambda^t, .),  V2 = max_phi U(Lambda^t, .) - U(row),
// the inner maximum from a converged OMD-RT solve at the row's Lambda.
// Rows must carry their rates and belong to `graph`.
void lyapunov_trace(std::vector<JointTraceRow>& rows, double u_star,
                    const AugmentedGraph& graph,
                    const std::vector<SessionDag>& dags,
                    const UtilityOracle& oracle, const LinkCostModel& cost,
                    const RoutingSolverConfig& routing);

struct SwitchRun {
  std::string algo;
  std::vector<JointTraceRow> trace;
  Allocation allocation;
  double utility = 0.0;
  double first_after_switch = 0.0;  // U right after the switch, before updates
  bool reconverged = false;
  int reconverged_at = -1;  // iteration where the Lambda change fell below tau
};

struct SwitchExperiment {
  SwitchRun nested;  // gs_oma
  SwitchRun single;  // omad
};

// Runs GS-OMA and OMAD on `before`; iteration `switch_iter` replaces the
// instance with `after` (dags rebuilt, phi reset to uniform, Lambda kept)
// and is logged with event "topology_switch". No stopping before the
// switch; afterwards each run stops once the Lambda change drops below
// tau_Lambda or at iteration 4 * switch_iter.
SwitchExperiment topology_change_experiment(const Instance& before,
                                            const Instance& after,
                                            const UtilityOracle& oracle,
                                            int switch_iter,
                                            const AllocSolverConfig& config);

// "iter,algo,U,V1,V2,V,event"
void write_joint_trace(const std::vector<JointTraceRow>& rows,
                       std::ostream& out);

}  // namespace cec

#endif  // CEC_JOINT_H
