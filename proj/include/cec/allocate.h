#ifndef CEC_ALLOCATE_H
#define CEC_ALLOCATE_H

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "cec/cost.h"
#include "cec/errors.h"
#include "cec/flow.h"
#include "cec/network.h"
#include "cec/routing.h"
#include "cec/utility.h"

namespace cec {

// Observes the joint utility U at a (possibly off-simplex) rate vector.
using UtilityEvaluator = std::function<double(std::span<const double>)>;

struct GradientEstimate {
  std::vector<double> g;        // per-session partial estimates
  std::vector<double> u_plus;   // U(Lambda + delta e_w)
  std::vector<double> u_minus;  // U(Lambda - delta e_w)
};

// An evaluator call failed; `session` and `sign` (+1/-1) name the probe.
class PerturbationError : public Error {
 public:
  PerturbationError(int session, int sign, const std::string& what);
  int session() const { return session_; }
  int sign() const { return sign_; }

 private:
  int session_;
  int sign_;
};

// g_w = (U(Lambda + delta e_w) - U(Lambda - delta e_w)) / (2 delta), probing
// sessions in order, + before -. Exactly 2W evaluator calls.
GradientEstimate two_point_gradient(std::span<const double> rates,
                                    const UtilityEvaluator& evaluator,
                                    double delta);

// lambda_w <- lambda * lambda_w e^{eta g_w} / sum_v lambda_v e^{eta g_v},
// exponents shifted by max_w eta g_w. Entries must be > 0.
Allocation mirror_ascent_step(const Allocation& allocation,
                              std::span<const double> g, double eta);

// Euclidean projection onto {x : delta <= x_w <= lambda - delta,
// sum x = lambda}. Throws InvalidArgument when lambda < W delta.
Allocation project_box(const Allocation& allocation, double delta);

struct OptimalityResidualA {
  double spread = 0.0;  // max_w g_w - min_w g_w
  double alpha = 0.0;   // mean g
};

OptimalityResidualA theorem1_residual(std::span<const double> g);

struct AllocSolverConfig {
  double delta = 0.0;      // <= 0 selects 0.01 * lambda
  double step_size = 0.0;  // <= 0 selects 0.5 / (L_est + 1)
  // <= 0 estimates L from check_assumptions on a 1001-point grid.
  double lipschitz = 0.0;
  int max_iterations = 200;
  double tolerance = 1e-6;  // sup-norm change of Lambda
  // Halve eta while U(Lambda^{t+1}) < U(Lambda^t) - 2 L delta.
  bool halve_on_violation = true;
  int max_halvings = 40;
  RoutingSolverConfig routing;
};

// Resolved scalar settings of a run.
struct AllocParameters {
  double delta = 0.0;
  double step = 0.0;
  double lipschitz = 0.0;
};

AllocParameters resolve_parameters(const AllocSolverConfig& config,
                                   const UtilityOracle& oracle,
                                   double total_rate);

struct AllocTraceRow {
  int iter = 0;
  double utility = 0.0;     // U(Lambda^t, phi*(Lambda^t))
  double grad_spread = 0.0;  // estimate that produced this row; 0 on row 0
  std::vector<double> rates;
};

struct AllocResult {
  Allocation allocation;
  RoutingResult routing;  // converged routing at the final allocation
  double utility = 0.0;
  int iterations = 0;
  bool converged = false;
  double final_step = 0.0;
  std::vector<AllocTraceRow> trace;  // row 0 is Lambda^1
};

// U(rates) = sum_w u_w - D(phi*), phi* from an OMD-RT solve started at the
// uniform routing. One oracle query per call.
double nested_utility(const AugmentedGraph& graph,
                      const std::vector<SessionDag>& dags,
                      std::span<const double> rates,
                      const UtilityOracle& oracle, const LinkCostModel& cost,
                      const RoutingSolverConfig& routing,
                      RoutingResult* solved = nullptr);

// One GS-OMA outer iteration from `state`. Only the 2W probes query
// `oracle`; the ascent check and the new U go through `monitor`.
struct GsOmaState {
  Allocation allocation;
  double utility = 0.0;  // U at `allocation`
  double step = 0.0;
  RoutingResult routing;
};

struct GsOmaIterate {
  double change = 0.0;
  double grad_spread = 0.0;
};

GsOmaState gs_oma_start(const AugmentedGraph& graph,
                        const std::vector<SessionDag>& dags,
                        const UtilityOracle& monitor, const LinkCostModel& cost,
                        const Allocation& allocation,
                        const AllocParameters& params,
                        const AllocSolverConfig& config);

GsOmaIterate gs_oma_iterate(const AugmentedGraph& graph,
                            const std::vector<SessionDag>& dags,
                            const UtilityOracle& oracle,
                            const UtilityOracle& monitor,
                            const LinkCostModel& cost,
                            const AllocParameters& params,
                            const AllocSolverConfig& config, GsOmaState& state);

AllocResult gs_oma_solve(const AugmentedGraph& graph,
                         const std::vector<SessionDag>& dags,
                         const UtilityOracle& oracle, const LinkCostModel& cost,
                         double total_rate, const AllocSolverConfig& config);

// "iter,U,grad_spread,lambda_1..lambda_W"
void write_alloc_trace(const std::vector<AllocTraceRow>& trace,
                       std::ostream& out);

}  // namespace cec

#endif  // CEC_ALLOCATE_H
