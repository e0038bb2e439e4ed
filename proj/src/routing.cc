#include "cec/routing.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>

#include "cec/errors.h"

namespace cec {

namespace {

// Fills `m` in place so the descent loop can reuse its storage.
void BroadcastInto(const AugmentedGraph& graph,
                   const std::vector<SessionDag>& dags,
                   const std::vector<double>& link_derivative,
                   const RoutingConfig& routing, MarginalCosts& m) {
  const int sessions = static_cast<int>(dags.size());
  m.rounds = 0;
  m.link.resize(sessions);
  m.node.resize(sessions);
  for (int w = 0; w < sessions; ++w) {
    const SessionDag& dag = dags[w];
    m.link[w].resize(dag.out_links.size());
    auto& node = m.node[w];
    node.assign(graph.node_count(), 0.0);
    // Reverse topological order: D_w first, marginal 0 there.
    for (auto it = dag.order.rbegin(); it != dag.order.rend(); ++it) {
      const NodeId i = *it;
      const auto& outs = dag.out_links[i];
      auto& row = m.link[w][i];
      row.resize(outs.size());
      const auto& phi = routing.phi[w][i];
      double sum = 0.0;
      for (size_t k = 0; k < outs.size(); ++k) {
        row[k] = link_derivative[outs[k]] + node[graph.link(outs[k]).to];
        sum += phi[k] * row[k];
      }
      node[i] = sum;
    }
    m.rounds = std::max(m.rounds, dag.longest_path);
  }
}

void OmdStepInto(const RoutingConfig& routing, const FlowState& flows,
                 const MarginalCosts& marginals, double step,
                 double max_log_shrink, RoutingConfig& next) {
  next = routing;
  for (size_t w = 0; w < next.phi.size(); ++w) {
    for (size_t i = 0; i < next.phi[w].size(); ++i) {
      auto& row = next.phi[w][i];
      if (row.size() < 2 || flows.throughput[w][i] <= 0.0) continue;
      const auto& delta = marginals.link[w][i];
      const double shift = *std::min_element(delta.begin(), delta.end());
      double sum = 0.0;
      for (size_t k = 0; k < row.size(); ++k) {
        double exponent = std::max(-step * (delta[k] - shift), -max_log_shrink);
        row[k] *= std::exp(exponent);
        sum += row[k];
      }
      if (!(sum > 0.0) || !std::isfinite(sum)) {
        throw NumericalError("underflow; reduce eta_k");
      }
      for (double& x : row) x /= sum;
    }
  }
}

// Euclidean projection of v onto the probability simplex (sort-based).
void ProjectSimplex(std::vector<double>& v, std::vector<double>& sorted) {
  sorted = v;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (size_t k = 0; k < sorted.size(); ++k) {
    cumulative += sorted[k];
    double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) theta = candidate;
  }
  double sum = 0.0;
  for (double& x : v) {
    x = std::max(0.0, x - theta);
    sum += x;
  }
  for (double& x : v) x /= sum;
}

void PgdStepInto(const RoutingConfig& routing, const FlowState& flows,
                 const MarginalCosts& marginals, double step,
                 RoutingConfig& next) {
  next = routing;
  std::vector<double> scratch;
  for (size_t w = 0; w < next.phi.size(); ++w) {
    for (size_t i = 0; i < next.phi[w].size(); ++i) {
      auto& row = next.phi[w][i];
      const double t = flows.throughput[w][i];
      if (row.size() < 2 || t <= 0.0) continue;
      const auto& delta = marginals.link[w][i];
      for (size_t k = 0; k < row.size(); ++k) row[k] -= step * t * delta[k];
      ProjectSimplex(row, scratch);
    }
  }
}

}  // namespace

MarginalCosts broadcast_marginals(const AugmentedGraph& graph,
                                  const std::vector<SessionDag>& dags,
                                  const FlowState& flows,
                                  const RoutingConfig& routing,
                                  const LinkCostModel& cost) {
  std::vector<double> link_derivative(graph.link_count());
  for (LinkId l = 0; l < graph.link_count(); ++l) {
    link_derivative[l] =
        cost.derivative(flows.link_flow[l], graph.link(l).capacity, l);
  }
  MarginalCosts m;
  BroadcastInto(graph, dags, link_derivative, routing, m);
  return m;
}

RoutingConfig omd_rt_step(const RoutingConfig& routing, const FlowState& flows,
                          const MarginalCosts& marginals, double step,
                          double max_log_shrink) {
  RoutingConfig next;
  OmdStepInto(routing, flows, marginals, step, max_log_shrink, next);
  return next;
}

RoutingConfig pgd_step(const RoutingConfig& routing, const FlowState& flows,
                       const MarginalCosts& marginals, double step) {
  RoutingConfig next;
  PgdStepInto(routing, flows, marginals, step, next);
  return next;
}

namespace {

using StepFn = std::function<void(const RoutingConfig&, const FlowState&,
                                  const MarginalCosts&, double, RoutingConfig&)>;

// Flows, cost and link derivatives at one routing point.
struct Evaluated {
  FlowState flows;
  std::vector<double> derivative;
  double cost = 0.0;
  bool feasible = true;
};

void EvaluateInto(const AugmentedGraph& graph,
                  const std::vector<SessionDag>& dags,
                  std::span<const double> rates, const RoutingConfig& routing,
                  const LinkCostModel& cost, Evaluated& e) {
  propagate_into(graph, dags, rates, routing, e.flows);
  e.derivative.resize(graph.link_count());
  e.feasible = true;
  double sum = 0.0;
  for (LinkId l = 0; l < graph.link_count(); ++l) {
    const double f = e.flows.link_flow[l];
    const double c = graph.link(l).capacity;
    if (!cost.in_domain(f, c)) {
      e.feasible = false;
      e.cost = std::numeric_limits<double>::infinity();
      return;
    }
    if (cost.kind == CostKind::kExpRatio) {
      const double v = cost.value(f, c, l);
      sum += v;
      e.derivative[l] = cost.coeff / c * v;
    } else {
      sum += cost.value(f, c, l);
      e.derivative[l] = cost.derivative(f, c, l);
    }
  }
  e.cost = sum;
}

RoutingResult DescentLoop(const AugmentedGraph& graph,
                          const std::vector<SessionDag>& dags,
                          std::span<const double> rates,
                          const RoutingConfig& start, const LinkCostModel& cost,
                          const RoutingSolverConfig& config,
                          const StepFn& step_fn) {
  if (config.max_iterations < 0) throw InvalidArgument("K must be >= 0");
  double step = config.initial_step();
  if (!(step >= 0.0)) throw InvalidArgument("step size must be >= 0");
  validate_routing(start, dags);

  RoutingResult result;
  result.routing = start;
  Evaluated current;
  EvaluateInto(graph, dags, rates, start, cost, current);
  if (!current.feasible) {
    // Surface the domain violation with its link id.
    total_cost(graph, current.flows, cost);
  }
  MarginalCosts marginals;
  BroadcastInto(graph, dags, current.derivative, result.routing, marginals);
  result.trace.push_back(
      {0, current.cost,
       config.trace_residual
           ? theorem3_residual(graph, dags, current.flows, marginals,
                               result.routing)
                 .max_spread
           : 0.0,
       0.0});

  // Accept a step when it does not raise the cost beyond round-off, and
  // never by more than 1e-10.
  const auto accepts = [](double candidate, double incumbent) {
    return candidate <=
           incumbent + std::min(1e-10, 1e-14 * (1.0 + std::abs(incumbent)));
  };

  RoutingConfig candidate;
  Evaluated next;
  for (int k = 1; k <= config.max_iterations; ++k) {
    bool stalled = false;
    while (true) {
      step_fn(result.routing, current.flows, marginals, step, candidate);
      EvaluateInto(graph, dags, rates, candidate, cost, next);
      if (!config.halve_on_increase) {
        if (!next.feasible) total_cost(graph, next.flows, cost);
        break;
      }
      if (next.feasible && accepts(next.cost, current.cost)) break;
      step *= 0.5;
      if (step < config.min_step) {
        stalled = true;
        break;
      }
    }
    if (stalled) {
      result.converged = true;
      break;
    }
    const double change = candidate.sup_distance(result.routing);
    std::swap(result.routing, candidate);
    std::swap(current, next);
    BroadcastInto(graph, dags, current.derivative, result.routing, marginals);
    result.iterations = k;
    result.trace.push_back(
        {k, current.cost,
         config.trace_residual
             ? theorem3_residual(graph, dags, current.flows, marginals,
                                 result.routing)
                   .max_spread
             : 0.0,
         change});
    if (change < config.tolerance) {
      result.converged = true;
      break;
    }
  }
  result.flows = std::move(current.flows);
  result.cost = current.cost;
  result.final_step = step;
  return result;
}

}  // namespace

RoutingResult omd_rt_solve(const AugmentedGraph& graph,
                           const std::vector<SessionDag>& dags,
                           std::span<const double> rates,
                           const RoutingConfig& start,
                           const LinkCostModel& cost,
                           const RoutingSolverConfig& config) {
  const double shrink = config.max_log_shrink;
  return DescentLoop(graph, dags, rates, start, cost, config,
                     [shrink](const RoutingConfig& routing, const FlowState& flows,
                              const MarginalCosts& marginals, double step,
                              RoutingConfig& next) {
                       OmdStepInto(routing, flows, marginals, step, shrink, next);
                     });
}

RoutingResult pgd_routing_baseline(const AugmentedGraph& graph,
                                   const std::vector<SessionDag>& dags,
                                   std::span<const double> rates,
                                   const RoutingConfig& start,
                                   const LinkCostModel& cost,
                                   const RoutingSolverConfig& config) {
  return DescentLoop(graph, dags, rates, start, cost, config, PgdStepInto);
}

OptimalityResidualR theorem3_residual(const AugmentedGraph& graph,
                                      const std::vector<SessionDag>& dags,
                                      const FlowState& flows,
                                      const MarginalCosts& marginals,
                                      const RoutingConfig& routing,
                                      double support_threshold) {
  OptimalityResidualR r;
  const int sessions = static_cast<int>(dags.size());
  r.spread.assign(sessions, std::vector<double>(graph.node_count(), 0.0));
  r.multiplier.assign(sessions, std::vector<double>(graph.node_count(), 0.0));
  double marginal_total = 0.0;
  long marginal_count = 0;
  for (int w = 0; w < sessions; ++w) {
    for (NodeId i : dags[w].order) {
      const double t = flows.throughput[w][i];
      const auto& row = routing.phi[w][i];
      if (row.empty() || t <= 0.0) continue;
      const auto& delta = marginals.link[w][i];
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      double sum = 0.0;
      int used = 0;
      for (size_t k = 0; k < row.size(); ++k) {
        if (row[k] <= support_threshold) continue;
        double g = t * delta[k];
        lo = std::min(lo, g);
        hi = std::max(hi, g);
        sum += g;
        ++used;
        marginal_total += std::abs(g);
        ++marginal_count;
      }
      if (used == 0) continue;
      const double mean = sum / used;
      r.spread[w][i] = hi - lo;
      r.multiplier[w][i] = -mean;
      for (size_t k = 0; k < row.size(); ++k) {
        if (row[k] > support_threshold) continue;
        r.max_kkt_violation =
            std::max(r.max_kkt_violation, mean - t * delta[k]);
      }
      if (hi - lo > r.max_spread) {
        r.max_spread = hi - lo;
        r.worst_session = w;
        r.worst_node = i;
      }
    }
  }
  if (marginal_count > 0) r.mean_marginal = marginal_total / marginal_count;
  return r;
}

namespace {

struct PathFlow {
  std::vector<LinkId> links;
  double flow = 0.0;
};

class OptSolver {
 public:
  OptSolver(const AugmentedGraph& graph, const std::vector<SessionDag>& dags,
            std::span<const double> rates, const LinkCostModel& cost)
      : graph_(graph), dags_(dags), rates_(rates.begin(), rates.end()),
        cost_(cost), paths_(dags.size()) {}

  OptResult Run(double rel_tol, int max_rounds) {
    Initialise();
    OptResult result;
    for (int round = 1; round <= max_rounds; ++round) {
      result.iterations = round;
      double gap = AddShortestPaths();
      result.gap = gap;
      if (gap <= rel_tol * std::abs(Cost())) break;
      for (int sweep = 0; sweep < 25; ++sweep) {
        if (EquilibrateAll() < 1e-15) break;
      }
    }
    result.cost = Cost();
    result.link_flow = flow_;
    return result;
  }

 private:
  double Derivative(LinkId l) const {
    return cost_.derivative(flow_[l], graph_.link(l).capacity, l);
  }
  double Curvature(LinkId l) const {
    return cost_.second_derivative(flow_[l], graph_.link(l).capacity, l);
  }
  double Cost() const {
    double sum = 0.0;
    for (LinkId l = 0; l < graph_.link_count(); ++l) {
      sum += cost_.value(flow_[l], graph_.link(l).capacity, l);
    }
    return sum;
  }

  // Start from the uniform-split flow, decomposed into paths.
  void Initialise() {
    RoutingConfig uniform = RoutingConfig::uniform(dags_);
    FlowState flows = propagate(graph_, dags_, rates_, uniform);
    flow_.assign(graph_.link_count(), 0.0);
    for (size_t w = 0; w < dags_.size(); ++w) {
      if (rates_[w] <= 0.0) continue;
      std::vector<double> remaining = flows.session_flow[w];
      const NodeId dest = graph_.destination(static_cast<int>(w));
      double assigned = 0.0;
      while (rates_[w] - assigned > 1e-12 * rates_[w]) {
        PathFlow path;
        NodeId at = graph_.source();
        double bottleneck = std::numeric_limits<double>::infinity();
        while (at != dest) {
          const auto& outs = dags_[w].out_links[at];
          LinkId best = -1;
          for (LinkId l : outs) {
            if (best < 0 || remaining[l] > remaining[best]) best = l;
          }
          if (best < 0 || remaining[best] <= 0.0) break;
          path.links.push_back(best);
          bottleneck = std::min(bottleneck, remaining[best]);
          at = graph_.link(best).to;
        }
        if (at != dest || !(bottleneck > 0.0)) break;
        for (LinkId l : path.links) remaining[l] -= bottleneck;
        path.flow = bottleneck;
        assigned += bottleneck;
        paths_[w].push_back(std::move(path));
      }
      // Absorb decomposition round-off so each session carries exactly its rate.
      double scale = rates_[w] / assigned;
      for (PathFlow& p : paths_[w]) {
        p.flow *= scale;
        for (LinkId l : p.links) flow_[l] += p.flow;
      }
    }
    for (LinkId l = 0; l < graph_.link_count(); ++l) {
      if (!cost_.in_domain(flow_[l], graph_.link(l).capacity)) {
        throw CapacityExceeded(l, flow_[l], graph_.link(l).capacity);
      }
    }
  }

  std::vector<LinkId> ShortestPath(int w, const std::vector<double>& weight,
                                   double& length) const {
    const SessionDag& dag = dags_[w];
    std::vector<double> dist(graph_.node_count(),
                             std::numeric_limits<double>::infinity());
    std::vector<LinkId> next(graph_.node_count(), -1);
    dist[graph_.destination(w)] = 0.0;
    for (auto it = dag.order.rbegin(); it != dag.order.rend(); ++it) {
      for (LinkId l : dag.out_links[*it]) {
        double d = weight[l] + dist[graph_.link(l).to];
        if (d < dist[*it]) {
          dist[*it] = d;
          next[*it] = l;
        }
      }
    }
    std::vector<LinkId> path;
    for (NodeId at = graph_.source(); next[at] >= 0; at = graph_.link(next[at]).to) {
      path.push_back(next[at]);
    }
    length = dist[graph_.source()];
    return path;
  }

  // Adds each session's shortest path as a column; returns the duality gap.
  double AddShortestPaths() {
    std::vector<double> weight(graph_.link_count());
    double linear = 0.0;
    for (LinkId l = 0; l < graph_.link_count(); ++l) {
      weight[l] = Derivative(l);
      linear += weight[l] * flow_[l];
    }
    double lower = 0.0;
    for (size_t w = 0; w < dags_.size(); ++w) {
      if (rates_[w] <= 0.0) continue;
      double length = 0.0;
      std::vector<LinkId> path = ShortestPath(static_cast<int>(w), weight, length);
      lower += rates_[w] * length;
      bool known = std::any_of(paths_[w].begin(), paths_[w].end(),
                               [&](const PathFlow& p) { return p.links == path; });
      if (!known) paths_[w].push_back({std::move(path), 0.0});
    }
    return std::max(0.0, linear - lower);
  }

  double PathLength(const PathFlow& p) const {
    double length = 0.0;
    for (LinkId l : p.links) length += Derivative(l);
    return length;
  }

  // Shifts flow from `from` onto `to` until their first-derivative lengths
  // agree or `from` empties. Returns the amount moved.
  double Shift(PathFlow& from, PathFlow& to) {
    std::vector<LinkId> only_from;
    std::vector<LinkId> only_to;
    for (LinkId l : from.links) {
      if (std::find(to.links.begin(), to.links.end(), l) == to.links.end()) {
        only_from.push_back(l);
      }
    }
    for (LinkId l : to.links) {
      if (std::find(from.links.begin(), from.links.end(), l) == from.links.end()) {
        only_to.push_back(l);
      }
    }
    const std::vector<double> base = flow_;
    // Flows on `to`-only links must stay inside the cost domain (M/M/1).
    double upper = from.flow;
    if (cost_.kind == CostKind::kMM1) {
      for (LinkId l : only_to) {
        upper = std::min(upper, 0.999 * (graph_.link(l).capacity - base[l]));
      }
    }
    auto slope = [&](double amount, double& curvature) {
      double g = 0.0;
      curvature = 0.0;
      for (LinkId l : only_to) {
        double c = graph_.link(l).capacity;
        g += cost_.derivative(base[l] + amount, c, l);
        curvature += cost_.second_derivative(base[l] + amount, c, l);
      }
      for (LinkId l : only_from) {
        double c = graph_.link(l).capacity;
        double f = std::max(0.0, base[l] - amount);
        g -= cost_.derivative(f, c, l);
        curvature += cost_.second_derivative(f, c, l);
      }
      return g;
    };
    double h = 0.0;
    if (slope(0.0, h) >= 0.0 || upper <= 0.0) return 0.0;
    double amount;
    if (slope(upper, h) <= 0.0) {
      amount = upper;
    } else {
      // Safeguarded Newton on the increasing slope over [lo, hi].
      double lo = 0.0;
      double hi = upper;
      amount = 0.0;
      for (int it = 0; it < 60; ++it) {
        double g = slope(amount, h);
        if (g < 0.0) lo = amount; else hi = amount;
        if (std::abs(g) <= 1e-15 * (1.0 + h) || hi - lo <= 1e-16 * upper) break;
        double trial = h > 0.0 ? amount - g / h : 0.5 * (lo + hi);
        if (!(trial > lo && trial < hi)) trial = 0.5 * (lo + hi);
        amount = trial;
      }
    }
    for (LinkId l : only_from) flow_[l] = std::max(0.0, base[l] - amount);
    for (LinkId l : only_to) flow_[l] = base[l] + amount;
    from.flow -= amount;
    to.flow += amount;
    if (from.flow < 1e-15 * (1.0 + to.flow)) {
      to.flow += from.flow;
      from.flow = 0.0;
    }
    return amount;
  }

  // One Gauss-Seidel sweep over sessions; returns the largest relative
  // length spread among used paths seen before shifting.
  double EquilibrateAll() {
    double worst = 0.0;
    for (size_t w = 0; w < dags_.size(); ++w) {
      auto& paths = paths_[w];
      if (paths.size() < 2) continue;
      for (size_t p = 0; p < paths.size(); ++p) {
        size_t best = 0;
        double best_length = std::numeric_limits<double>::infinity();
        for (size_t q = 0; q < paths.size(); ++q) {
          double length = PathLength(paths[q]);
          if (length < best_length) {
            best_length = length;
            best = q;
          }
        }
        if (p == best || paths[p].flow <= 0.0) continue;
        double spread = (PathLength(paths[p]) - best_length) /
                        (std::abs(best_length) + 1e-300);
        worst = std::max(worst, spread);
        Shift(paths[p], paths[best]);
      }
      paths.erase(std::remove_if(paths.begin(), paths.end(),
                                 [](const PathFlow& p) { return p.flow <= 0.0; }),
                  paths.end());
    }
    return worst;
  }

  const AugmentedGraph& graph_;
  const std::vector<SessionDag>& dags_;
  std::vector<double> rates_;
  LinkCostModel cost_;
  std::vector<std::vector<PathFlow>> paths_;
  std::vector<double> flow_;
};

}  // namespace

OptResult opt_baseline(const AugmentedGraph& graph,
                       const std::vector<SessionDag>& dags,
                       std::span<const double> rates, const LinkCostModel& cost,
                       double rel_tol, int max_rounds) {
  if (static_cast<int>(rates.size()) != graph.session_count()) {
    throw InvalidArgument("allocation dimension mismatch");
  }
  OptSolver solver(graph, dags, rates, cost);
  return solver.Run(rel_tol, max_rounds);
}

void write_routing_trace(const std::vector<RoutingTraceRow>& trace,
                         std::ostream& out) {
  out << "iter,D,residual_spread,phi_change\n" << std::setprecision(17);
  for (const auto& row : trace) {
    out << row.iter << ',' << row.cost << ',' << row.residual_spread << ','
        << row.phi_change << "\n";
  }
}

}  // namespace cec
