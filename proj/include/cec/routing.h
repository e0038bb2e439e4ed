#ifndef CEC_ROUTING_H
#define CEC_ROUTING_H

#include <iosfwd>
#include <span>
#include <vector>

#include "cec/cost.h"
#include "cec/flow.h"
#include "cec/network.h"

namespace cec {

// Marginal routing costs delivered by the broadcast sweep.
struct MarginalCosts {
  // delta-phi_ij(w) = D'_ij(F_ij) + dD/dr_j(w), aligned with dag out_links.
  std::vector<std::vector<std::vector<double>>> link;
  // dD/dr_i(w), [w][node]; zero at D_w.
  std::vector<std::vector<double>> node;
  // Rounds needed for the last node to hear from D_w (max over sessions).
  int rounds = 0;
};

MarginalCosts broadcast_marginals(const AugmentedGraph& graph,
                                  const std::vector<SessionDag>& dags,
                                  const FlowState& flows,
                                  const RoutingConfig& routing,
                                  const LinkCostModel& cost);

struct RoutingSolverConfig {
  double step_size = 1.0;  // eta_k; ignored when smoothness > 0
  // When positive, eta_k = strong_convexity / smoothness (c / L_D).
  double smoothness = 0.0;
  double strong_convexity = 1.0;
  int max_iterations = 1000;
  double tolerance = 1e-10;  // sup-norm change of phi
  // Halve eta whenever a step would raise the total cost, and retry.
  bool halve_on_increase = true;
  double min_step = 1e-14;
  // Lower bound on the exponent -eta * (delta-phi_ij - min_k delta-phi_ik)
  // of a single multiplicative update.
  double max_log_shrink = 10.0;
  // Compute the optimality residual for every trace row.
  bool trace_residual = true;

  double initial_step() const {
    return smoothness > 0.0 ? strong_convexity / smoothness : step_size;
  }
};

struct RoutingTraceRow {
  int iter = 0;
  double cost = 0.0;
  double residual_spread = 0.0;
  double phi_change = 0.0;
};

struct RoutingResult {
  RoutingConfig routing;
  FlowState flows;
  double cost = 0.0;
  int iterations = 0;  // accepted steps
  bool converged = false;
  double final_step = 0.0;
  std::vector<RoutingTraceRow> trace;  // row 0 is the starting point
};

// One exponentiated-gradient step (softmax of -eta * delta-phi) on every row
// whose node carries traffic. Rows with t_i(w) = 0 are copied unchanged. No
// fraction shrinks by more than exp(-max_log_shrink) relative to the row's
// cheapest link in one step, so fractions stay strictly positive.
// Throws NumericalError if a row degenerates.
RoutingConfig omd_rt_step(const RoutingConfig& routing, const FlowState& flows,
                          const MarginalCosts& marginals, double step,
                          double max_log_shrink = 10.0);

// Euclidean gradient-projection step on the same rows:
// phi_i <- Proj_simplex(phi_i - eta * t_i * delta-phi_i).
RoutingConfig pgd_step(const RoutingConfig& routing, const FlowState& flows,
                       const MarginalCosts& marginals, double step);

RoutingResult omd_rt_solve(const AugmentedGraph& graph,
                           const std::vector<SessionDag>& dags,
                           std::span<const double> rates,
                           const RoutingConfig& start,
                           const LinkCostModel& cost,
                           const RoutingSolverConfig& config);

RoutingResult pgd_routing_baseline(const AugmentedGraph& graph,
                                   const std::vector<SessionDag>& dags,
                                   std::span<const double> rates,
                                   const RoutingConfig& start,
                                   const LinkCostModel& cost,
                                   const RoutingSolverConfig& config);

// KKT residual of the routing optimality condition: on every node that
// carries traffic, dD/dphi_ij = t_i * delta-phi_ij must be equal across the
// links it uses and no smaller on the links it does not use.
struct OptimalityResidualR {
  std::vector<std::vector<double>> spread;      // [w][node]
  std::vector<std::vector<double>> multiplier;  // alpha_i(w) = -mean
  double max_spread = 0.0;
  double max_kkt_violation = 0.0;  // unused links priced below the multiplier
  double mean_marginal = 0.0;      // mean |t_i delta-phi_ij| on used links
  int worst_session = -1;
  NodeId worst_node = -1;
};

OptimalityResidualR theorem3_residual(const AugmentedGraph& graph,
                                      const std::vector<SessionDag>& dags,
                                      const FlowState& flows,
                                      const MarginalCosts& marginals,
                                      const RoutingConfig& routing,
                                      double support_threshold = 1e-6);

struct OptResult {
  double cost = 0.0;
  std::vector<double> link_flow;
  double gap = 0.0;  // Frank-Wolfe duality gap at termination
  int iterations = 0;
};

// Centralised minimum of the total cost over per-session arc flows on the
// session dags. Conditional-gradient column generation: each round adds the
// shortest path of every session under the current link derivatives, then
// re-equilibrates the collected paths by pairwise Newton flow shifts. Stops
// once the duality gap drops below rel_tol * |D|.
OptResult opt_baseline(const AugmentedGraph& graph,
                       const std::vector<SessionDag>& dags,
                       std::span<const double> rates, const LinkCostModel& cost,
                       double rel_tol = 1e-8, int max_rounds = 2000);

// "iter,D,residual_spread,phi_change"
void write_routing_trace(const std::vector<RoutingTraceRow>& trace,
                         std::ostream& out);

}  // namespace cec

#endif  // CEC_ROUTING_H
