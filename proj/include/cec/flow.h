#ifndef CEC_FLOW_H
#define CEC_FLOW_H

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "cec/cost.h"
#include "cec/network.h"
#include "cec/utility.h"

namespace cec {

// Workload allocation on the scaled simplex: rates >= 0 summing to `total`.
class Allocation {
 public:
  Allocation() = default;
  // Throws InvalidArgument on negative entries or |sum - total| > 1e-9.
  Allocation(std::vector<double> rates, double total);

  static Allocation uniform(int sessions, double total);

  const std::vector<double>& rates() const { return rates_; }
  double total() const { return total_; }
  int size() const { return static_cast<int>(rates_.size()); }
  double operator[](int w) const { return rates_[w]; }

  double sup_distance(const Allocation& other) const;

 private:
  std::vector<double> rates_;
  double total_ = 0.0;
};

// Per-session forwarding fractions. phi[w][i][k] is the share of session w's
// throughput at node i sent on dags[w].out_links[i][k].
struct RoutingConfig {
  std::vector<std::vector<std::vector<double>>> phi;

  // 1/|O(i)| on every allowed out-link.
  static RoutingConfig uniform(const std::vector<SessionDag>& dags);
  // Rows drawn uniformly from the simplex (flat Dirichlet), seeded.
  static RoutingConfig random(const std::vector<SessionDag>& dags,
                              std::uint64_t seed);

  double sup_distance(const RoutingConfig& other) const;
};

// Throws InvalidArgument if shapes disagree with the dags, an entry is
// negative, or a row does not sum to 1 within 1e-9.
void validate_routing(const RoutingConfig& routing,
                      const std::vector<SessionDag>& dags);

struct FlowState {
  std::vector<std::vector<double>> throughput;  // t_i(w), [w][node]
  std::vector<std::vector<double>> session_flow;  // f_ij(w), [w][link]
  std::vector<double> link_flow;                  // F_ij, [link]
};

// Forward substitution along each session's topological order. `rates` need
// not lie on the simplex (the zeroth-order probes use Lambda +- delta e_w).
FlowState propagate(const AugmentedGraph& graph,
                    const std::vector<SessionDag>& dags,
                    std::span<const double> rates,
                    const RoutingConfig& routing);

// Same, reusing the storage of `out`. Skips validate_routing unless asked.
void propagate_into(const AugmentedGraph& graph,
                    const std::vector<SessionDag>& dags,
                    std::span<const double> rates, const RoutingConfig& routing,
                    FlowState& out, bool validate = false);

// Sum of link costs over every physical and virtual link.
double total_cost(const AugmentedGraph& graph, const FlowState& flows,
                  const LinkCostModel& cost);

// One oracle query.
double utility_sum(std::span<const double> rates, const UtilityOracle& oracle);

// Sum_w u_w(lambda_w) - total_cost.
double total_utility(std::span<const double> rates, const UtilityOracle& oracle,
                     const AugmentedGraph& graph, const FlowState& flows,
                     const LinkCostModel& cost);

struct ConservationReport {
  double source = 0.0;       // |sum_out f_S - lambda_w|
  double host = 0.0;         // |f_{i D_w} - t_i| for i in D(w), plus stray out-flow
  double transit = 0.0;      // |sum_out - sum_in| elsewhere
  double destination = 0.0;  // |sum_in f_{D_w} - lambda_w|
  double max_residual = 0.0;
  int worst_session = -1;
  NodeId worst_node = -1;
};

ConservationReport check_conservation(const FlowState& flows,
                                      const AugmentedGraph& graph,
                                      std::span<const double> rates);

// Rows "session,i,j,f_ij" then "link,i,j,F_ij"; zero per-session flows are
// omitted, every aggregate link row is written.
void write_flow_csv(const FlowState& flows, const AugmentedGraph& graph,
                    std::ostream& out);

}  // namespace cec

#endif  // CEC_FLOW_H
