#ifndef CEC_NETWORK_H
#define CEC_NETWORK_H

#include <cstdint>
#include <vector>

#include "cec/topology.h"

namespace cec {

// Which model version (session index 0..W-1) each physical node hosts.
class ModelPlacement {
 public:
  ModelPlacement() = default;

  // Throws InvalidArgument unless every entry lies in [0, W) and every
  // version is hosted by at least one node.
  ModelPlacement(std::vector<int> version_of_node, int version_count);

  int version_count() const { return version_count_; }
  int node_count() const { return static_cast<int>(version_of_node_.size()); }
  int version(NodeId node) const { return version_of_node_[node]; }
  const std::vector<int>& versions() const { return version_of_node_; }

  // D(w): nodes hosting version w, ascending.
  std::vector<NodeId> hosts(int version) const;

 private:
  std::vector<int> version_of_node_;
  int version_count_ = 0;
};

// Uniform random placement, redrawn until every version has a host.
ModelPlacement random_placement(int node_count, int version_count,
                                std::uint64_t seed);

// Capacities of the virtual links: computation capacity C_i on (i, D_w) and
// the controller's access capacity on (S, i). Indexed by physical node.
struct NodeCapacities {
  std::vector<double> compute;
  std::vector<double> access;

  static NodeCapacities uniform(int node_count, double capacity);
};

// Draws both vectors with the same clamp-at-5% uniform sampler used for links.
NodeCapacities sample_node_capacities(int node_count, double mean,
                                      std::uint64_t seed);

enum class LinkKind { kPhysical, kSource, kCompute };

struct AugmentedLink {
  NodeId from = 0;
  NodeId to = 0;
  double capacity = 0.0;
  LinkKind kind = LinkKind::kPhysical;
};

// Physical network plus a virtual source S and one virtual destination per
// model version. Node ids: physical 0..N-1, S = N, D_w = N + 1 + w. Physical
// links keep their topology order and ids; virtual links follow.
class AugmentedGraph {
 public:
  int physical_node_count() const { return physical_nodes_; }
  int node_count() const { return physical_nodes_ + 1 + sessions_; }
  int session_count() const { return sessions_; }
  NodeId source() const { return physical_nodes_; }
  NodeId destination(int session) const {
    return physical_nodes_ + 1 + session;
  }
  bool is_physical(NodeId node) const { return node < physical_nodes_; }

  const std::vector<AugmentedLink>& links() const { return links_; }
  const AugmentedLink& link(LinkId id) const { return links_[id]; }
  int link_count() const { return static_cast<int>(links_.size()); }
  const std::vector<LinkId>& out_links(NodeId node) const { return out_[node]; }
  const std::vector<LinkId>& in_links(NodeId node) const { return in_[node]; }

  const ModelPlacement& placement() const { return placement_; }
  const std::vector<NodeId>& entry_nodes() const { return entry_nodes_; }

 private:
  friend AugmentedGraph augment(const Topology&, const ModelPlacement&,
                                const std::vector<NodeId>&,
                                const NodeCapacities&);

  int physical_nodes_ = 0;
  int sessions_ = 0;
  std::vector<AugmentedLink> links_;
  std::vector<std::vector<LinkId>> out_;
  std::vector<std::vector<LinkId>> in_;
  ModelPlacement placement_;
  std::vector<NodeId> entry_nodes_;
};

AugmentedGraph augment(const Topology& topology,
                       const ModelPlacement& placement,
                       const std::vector<NodeId>& entry_nodes,
                       const NodeCapacities& capacities);

// Virtual links take the topology's mean capacity.
AugmentedGraph augment(const Topology& topology,
                       const ModelPlacement& placement,
                       const std::vector<NodeId>& entry_nodes);

// Routing support of one session: links that strictly decrease the hop
// distance to D_w, excluding physical links between two hosts of the same
// version. Acyclic by construction.
struct SessionDag {
  int session = 0;
  // Nodes with a finite hop distance, by decreasing distance (ties by id).
  // The last entry is D_w.
  std::vector<NodeId> order;
  // Allowed out-links per augmented node id; empty for D_w and for nodes that
  // cannot reach D_w.
  std::vector<std::vector<LinkId>> out_links;
  // Hop distance to D_w inside the allowed graph, -1 if unreachable.
  std::vector<int> hop_distance;

  // Length (in links) of the longest allowed path; bounds the number of
  // marginal-cost broadcast rounds.
  int longest_path = 0;

  bool contains(LinkId link, const AugmentedGraph& graph) const;
  std::vector<LinkId> allowed_links() const;
};

// Throws TopologyError("unreachable destination") when S cannot reach D_w.
SessionDag build_session_dag(const AugmentedGraph& graph, int session);
std::vector<SessionDag> build_session_dags(const AugmentedGraph& graph);

}  // namespace cec

#endif  // CEC_NETWORK_H
