#include "cec/network.h"

#include <algorithm>
#include <queue>
#include <random>

#include "cec/errors.h"

namespace cec {

ModelPlacement::ModelPlacement(std::vector<int> version_of_node,
                               int version_count)
    : version_of_node_(std::move(version_of_node)),
      version_count_(version_count) {
  if (version_count_ < 1) throw InvalidArgument("need at least one version");
  std::vector<int> hosted(version_count_, 0);
  for (int v : version_of_node_) {
    if (v < 0 || v >= version_count_) {
      throw InvalidArgument("placement version out of range");
    }
    ++hosted[v];
  }
  for (int w = 0; w < version_count_; ++w) {
    if (hosted[w] == 0) {
      throw InvalidArgument("version " + std::to_string(w) + " has no host");
    }
  }
}

std::vector<NodeId> ModelPlacement::hosts(int version) const {
  std::vector<NodeId> out;
  for (NodeId i = 0; i < node_count(); ++i) {
    if (version_of_node_[i] == version) out.push_back(i);
  }
  return out;
}

ModelPlacement random_placement(int node_count, int version_count,
                                std::uint64_t seed) {
  if (node_count < version_count) {
    throw InvalidArgument("fewer nodes than model versions");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, version_count - 1);
  while (true) {
    std::vector<int> versions(node_count);
    std::vector<char> hosted(version_count, 0);
    for (int& v : versions) {
      v = pick(rng);
      hosted[v] = 1;
    }
    if (std::all_of(hosted.begin(), hosted.end(), [](char h) { return h; })) {
      return ModelPlacement(std::move(versions), version_count);
    }
  }
}

NodeCapacities NodeCapacities::uniform(int node_count, double capacity) {
  return {std::vector<double>(node_count, capacity),
          std::vector<double>(node_count, capacity)};
}

NodeCapacities sample_node_capacities(int node_count, double mean,
                                      std::uint64_t seed) {
  if (!(mean > 0.0)) throw InvalidArgument("mean capacity must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> draw(0.0, 2.0 * mean);
  NodeCapacities caps;
  caps.compute.resize(node_count);
  caps.access.resize(node_count);
  for (double& c : caps.compute) c = std::max(0.05 * mean, draw(rng));
  for (double& c : caps.access) c = std::max(0.05 * mean, draw(rng));
  return caps;
}

AugmentedGraph augment(const Topology& topology,
                       const ModelPlacement& placement,
                       const std::vector<NodeId>& entry_nodes,
                       const NodeCapacities& capacities) {
  const int n = topology.node_count();
  if (placement.node_count() != n) {
    throw InvalidArgument("placement does not cover every node");
  }
  if (entry_nodes.empty()) throw InvalidArgument("no entry nodes");
  if (static_cast<int>(capacities.compute.size()) != n ||
      static_cast<int>(capacities.access.size()) != n) {
    throw InvalidArgument("node capacity vectors must have one entry per node");
  }
  std::vector<NodeId> entries = entry_nodes;
  std::sort(entries.begin(), entries.end());
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
  for (NodeId e : entries) {
    if (e < 0 || e >= n) throw InvalidArgument("entry node not in topology");
  }

  AugmentedGraph g;
  g.physical_nodes_ = n;
  g.sessions_ = placement.version_count();
  g.placement_ = placement;
  g.entry_nodes_ = entries;
  for (const Link& link : topology.links()) {
    g.links_.push_back({link.from, link.to, link.capacity, LinkKind::kPhysical});
  }
  for (NodeId e : entries) {
    double c = capacities.access[e];
    if (!(c > 0.0)) throw InvalidArgument("access capacity must be positive");
    g.links_.push_back({g.source(), e, c, LinkKind::kSource});
  }
  for (NodeId i = 0; i < n; ++i) {
    double c = capacities.compute[i];
    if (!(c > 0.0)) throw InvalidArgument("compute capacity must be positive");
    g.links_.push_back(
        {i, g.destination(placement.version(i)), c, LinkKind::kCompute});
  }
  g.out_.assign(g.node_count(), {});
  g.in_.assign(g.node_count(), {});
  for (LinkId id = 0; id < g.link_count(); ++id) {
    g.out_[g.links_[id].from].push_back(id);
    g.in_[g.links_[id].to].push_back(id);
  }
  return g;
}

AugmentedGraph augment(const Topology& topology,
                       const ModelPlacement& placement,
                       const std::vector<NodeId>& entry_nodes) {
  return augment(topology, placement, entry_nodes,
                 NodeCapacities::uniform(topology.node_count(),
                                         topology.mean_capacity()));
}

bool SessionDag::contains(LinkId link, const AugmentedGraph& graph) const {
  const auto& outs = out_links[graph.link(link).from];
  return std::find(outs.begin(), outs.end(), link) != outs.end();
}

std::vector<LinkId> SessionDag::allowed_links() const {
  std::vector<LinkId> all;
  for (const auto& outs : out_links) all.insert(all.end(), outs.begin(), outs.end());
  std::sort(all.begin(), all.end());
  return all;
}

namespace {

bool RelayProhibited(const AugmentedGraph& graph, const AugmentedLink& link) {
  return link.kind == LinkKind::kPhysical &&
         graph.placement().version(link.from) ==
             graph.placement().version(link.to);
}

}  // namespace

SessionDag build_session_dag(const AugmentedGraph& graph, int session) {
  if (session < 0 || session >= graph.session_count()) {
    throw InvalidArgument("session out of range");
  }
  const int nodes = graph.node_count();
  const NodeId dest = graph.destination(session);
  SessionDag dag;
  dag.session = session;
  dag.hop_distance.assign(nodes, -1);
  dag.out_links.assign(nodes, {});

  // Reverse BFS from D_w over links that may carry the session at all.
  std::queue<NodeId> frontier;
  dag.hop_distance[dest] = 0;
  frontier.push(dest);
  while (!frontier.empty()) {
    NodeId v = frontier.front();
    frontier.pop();
    for (LinkId id : graph.in_links(v)) {
      const AugmentedLink& link = graph.link(id);
      if (RelayProhibited(graph, link)) continue;
      if (dag.hop_distance[link.from] < 0) {
        dag.hop_distance[link.from] = dag.hop_distance[v] + 1;
        frontier.push(link.from);
      }
    }
  }
  if (dag.hop_distance[graph.source()] < 0) {
    throw TopologyError("unreachable destination for session " +
                        std::to_string(session));
  }

  for (LinkId id = 0; id < graph.link_count(); ++id) {
    const AugmentedLink& link = graph.link(id);
    int from = dag.hop_distance[link.from];
    int to = dag.hop_distance[link.to];
    if (from < 0 || to < 0 || to >= from) continue;
    if (RelayProhibited(graph, link)) continue;
    dag.out_links[link.from].push_back(id);
  }

  for (NodeId v = 0; v < nodes; ++v) {
    if (dag.hop_distance[v] >= 0) dag.order.push_back(v);
  }
  std::stable_sort(dag.order.begin(), dag.order.end(), [&](NodeId a, NodeId b) {
    return dag.hop_distance[a] > dag.hop_distance[b];
  });

  // Longest path in links, by reverse topological sweep.
  std::vector<int> depth(nodes, 0);
  for (auto it = dag.order.rbegin(); it != dag.order.rend(); ++it) {
    for (LinkId id : dag.out_links[*it]) {
      depth[*it] = std::max(depth[*it], depth[graph.link(id).to] + 1);
    }
    dag.longest_path = std::max(dag.longest_path, depth[*it]);
  }
  return dag;
}

std::vector<SessionDag> build_session_dags(const AugmentedGraph& graph) {
  std::vector<SessionDag> dags;
  dags.reserve(graph.session_count());
  for (int w = 0; w < graph.session_count(); ++w) {
    dags.push_back(build_session_dag(graph, w));
  }
  return dags;
}

}  // namespace cec
