#include "cec/flow.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <string>

#include "cec/errors.h"

namespace cec {

Allocation::Allocation(std::vector<double> rates, double total)
    : rates_(std::move(rates)), total_(total) {
  double sum = 0.0;
  for (double r : rates_) {
    if (!(r >= 0.0)) throw InvalidArgument("allocation entry must be >= 0");
    sum += r;
  }
  if (std::abs(sum - total_) > 1e-9) {
    throw InvalidArgument("allocation does not sum to the total rate");
  }
}

Allocation Allocation::uniform(int sessions, double total) {
  if (sessions < 1) throw InvalidArgument("allocation needs >= 1 session");
  return Allocation(std::vector<double>(sessions, total / sessions), total);
}

double Allocation::sup_distance(const Allocation& other) const {
  double d = 0.0;
  for (int w = 0; w < size(); ++w) {
    d = std::max(d, std::abs(rates_[w] - other.rates_[w]));
  }
  return d;
}

RoutingConfig RoutingConfig::uniform(const std::vector<SessionDag>& dags) {
  RoutingConfig routing;
  routing.phi.resize(dags.size());
  for (size_t w = 0; w < dags.size(); ++w) {
    const auto& outs = dags[w].out_links;
    routing.phi[w].resize(outs.size());
    for (size_t i = 0; i < outs.size(); ++i) {
      if (!outs[i].empty()) {
        routing.phi[w][i].assign(outs[i].size(), 1.0 / outs[i].size());
      }
    }
  }
  return routing;
}

RoutingConfig RoutingConfig::random(const std::vector<SessionDag>& dags,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> draw(1.0);
  RoutingConfig routing = uniform(dags);
  for (auto& session : routing.phi) {
    for (auto& row : session) {
      if (row.size() < 2) continue;
      double sum = 0.0;
      for (double& x : row) {
        x = draw(rng);
        sum += x;
      }
      for (double& x : row) x /= sum;
    }
  }
  return routing;
}

double RoutingConfig::sup_distance(const RoutingConfig& other) const {
  double d = 0.0;
  for (size_t w = 0; w < phi.size(); ++w) {
    for (size_t i = 0; i < phi[w].size(); ++i) {
      const auto& a = phi[w][i];
      const auto& b = other.phi[w][i];
      for (size_t k = 0; k < a.size(); ++k) {
        d = std::max(d, std::abs(a[k] - b[k]));
      }
    }
  }
  return d;
}

void validate_routing(const RoutingConfig& routing,
                      const std::vector<SessionDag>& dags) {
  if (routing.phi.size() != dags.size()) {
    throw InvalidArgument("routing/session count mismatch");
  }
  for (size_t w = 0; w < dags.size(); ++w) {
    const auto& outs = dags[w].out_links;
    if (routing.phi[w].size() != outs.size()) {
      throw InvalidArgument("routing node count mismatch");
    }
    for (size_t i = 0; i < outs.size(); ++i) {
      const auto& row = routing.phi[w][i];
      if (row.size() != outs[i].size()) {
        throw InvalidArgument("routing support outside session dag at node " +
                              std::to_string(i));
      }
      if (row.empty()) continue;
      double sum = 0.0;
      for (double x : row) {
        if (!(x >= 0.0)) throw InvalidArgument("negative routing fraction");
        sum += x;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw InvalidArgument("routing row does not sum to 1 at node " +
                              std::to_string(i));
      }
    }
  }
}

FlowState propagate(const AugmentedGraph& graph,
                    const std::vector<SessionDag>& dags,
                    std::span<const double> rates,
                    const RoutingConfig& routing) {
  FlowState state;
  propagate_into(graph, dags, rates, routing, state, true);
  return state;
}

void propagate_into(const AugmentedGraph& graph,
                    const std::vector<SessionDag>& dags,
                    std::span<const double> rates, const RoutingConfig& routing,
                    FlowState& state, bool validate) {
  const int sessions = graph.session_count();
  if (static_cast<int>(rates.size()) != sessions ||
      static_cast<int>(dags.size()) != sessions) {
    throw InvalidArgument("allocation/routing dimension mismatch");
  }
  if (validate) validate_routing(routing, dags);
  state.throughput.resize(sessions);
  state.session_flow.resize(sessions);
  state.link_flow.assign(graph.link_count(), 0.0);
  for (int w = 0; w < sessions; ++w) {
    if (!(rates[w] >= 0.0)) throw InvalidArgument("negative session rate");
    auto& t = state.throughput[w];
    auto& f = state.session_flow[w];
    t.assign(graph.node_count(), 0.0);
    f.assign(graph.link_count(), 0.0);
    t[graph.source()] = rates[w];
    for (NodeId i : dags[w].order) {
      if (t[i] == 0.0) continue;
      const auto& outs = dags[w].out_links[i];
      const auto& row = routing.phi[w][i];
      for (size_t k = 0; k < outs.size(); ++k) {
        double flow = t[i] * row[k];
        f[outs[k]] = flow;
        t[graph.link(outs[k]).to] += flow;
      }
    }
  }
  // Fixed session order keeps the aggregate bit-reproducible.
  for (int w = 0; w < sessions; ++w) {
    for (LinkId l = 0; l < graph.link_count(); ++l) {
      state.link_flow[l] += state.session_flow[w][l];
    }
  }
}

double total_cost(const AugmentedGraph& graph, const FlowState& flows,
                  const LinkCostModel& cost) {
  double sum = 0.0;
  for (LinkId l = 0; l < graph.link_count(); ++l) {
    sum += cost.value(flows.link_flow[l], graph.link(l).capacity, l);
  }
  return sum;
}

double utility_sum(std::span<const double> rates, const UtilityOracle& oracle) {
  return oracle.evaluate_sum(rates);
}

double total_utility(std::span<const double> rates, const UtilityOracle& oracle,
                     const AugmentedGraph& graph, const FlowState& flows,
                     const LinkCostModel& cost) {
  return utility_sum(rates, oracle) - total_cost(graph, flows, cost);
}

ConservationReport check_conservation(const FlowState& flows,
                                      const AugmentedGraph& graph,
                                      std::span<const double> rates) {
  ConservationReport report;
  auto note = [&](double residual, double& bucket, int w, NodeId node) {
    bucket = std::max(bucket, residual);
    if (residual > report.max_residual) {
      report.max_residual = residual;
      report.worst_session = w;
      report.worst_node = node;
    }
  };
  const int sessions = graph.session_count();
  for (int w = 0; w < sessions; ++w) {
    const auto& f = flows.session_flow[w];
    const NodeId dest = graph.destination(w);
    for (NodeId i = 0; i < graph.node_count(); ++i) {
      double in = 0.0;
      double out = 0.0;
      for (LinkId l : graph.in_links(i)) in += f[l];
      for (LinkId l : graph.out_links(i)) out += f[l];
      if (i == graph.source()) {
        note(std::abs(out - rates[w]), report.source, w, i);
      } else if (i == dest) {
        note(std::abs(in - rates[w]), report.destination, w, i);
      } else if (!graph.is_physical(i)) {
        // Other sessions' destinations must not absorb session w.
        note(std::abs(in), report.transit, w, i);
      } else if (graph.placement().version(i) == w) {
        double to_dest = 0.0;
        for (LinkId l : graph.out_links(i)) {
          if (graph.link(l).to == dest) to_dest += f[l];
        }
        double stray = out - to_dest;
        note(std::abs(to_dest - in) + std::abs(stray), report.host, w, i);
      } else {
        note(std::abs(out - in), report.transit, w, i);
      }
    }
  }
  return report;
}

namespace {

std::string NodeLabel(const AugmentedGraph& graph, NodeId node) {
  if (graph.is_physical(node)) return std::to_string(node);
  if (node == graph.source()) return "S";
  return "D" + std::to_string(node - graph.source() - 1);
}

}  // namespace

void write_flow_csv(const FlowState& flows, const AugmentedGraph& graph,
                    std::ostream& out) {
  out << "session,i,j,flow\n" << std::setprecision(17);
  for (size_t w = 0; w < flows.session_flow.size(); ++w) {
    for (LinkId l = 0; l < graph.link_count(); ++l) {
      double f = flows.session_flow[w][l];
      if (f == 0.0) continue;
      out << w << ',' << NodeLabel(graph, graph.link(l).from) << ','
          << NodeLabel(graph, graph.link(l).to) << ',' << f << "\n";
    }
  }
  for (LinkId l = 0; l < graph.link_count(); ++l) {
    out << "link," << NodeLabel(graph, graph.link(l).from) << ','
        << NodeLabel(graph, graph.link(l).to) << ',' << flows.link_flow[l]
        << "\n";
  }
}

}  // namespace cec
