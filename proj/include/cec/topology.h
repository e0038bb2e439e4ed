#ifndef CEC_TOPOLOGY_H
#define CEC_TOPOLOGY_H

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace cec {

using NodeId = int;
using LinkId = int;

struct Link {
  NodeId from = 0;
  NodeId to = 0;
  double capacity = 0.0;  // flow units per second
};

// A physical network: directed links with positive capacities. Generators
// return strongly connected graphs; hand-built ones (tests, files) need not be.
class Topology {
 public:
  Topology() = default;

  // Throws InvalidArgument on self-loops, duplicate links, out-of-range ids or
  // non-positive capacities.
  Topology(int node_count, std::vector<Link> links, std::string name = "",
           std::uint64_t seed = 0);

  int node_count() const { return node_count_; }
  const std::vector<Link>& links() const { return links_; }
  int link_count() const { return static_cast<int>(links_.size()); }
  const std::string& name() const { return name_; }
  std::uint64_t seed() const { return seed_; }

  // Number of ER resampling attempts the generator needed (1 when not
  // generated by rejection sampling).
  int generation_attempts() const { return generation_attempts_; }
  void set_generation_attempts(int attempts) { generation_attempts_ = attempts; }

  // Nominal mean capacity C-bar attached by the generator or named loader.
  double mean_capacity() const { return mean_capacity_; }
  void set_mean_capacity(double mean) { mean_capacity_ = mean; }

  // Count of unordered node pairs joined by at least one link.
  int undirected_edge_count() const;

  bool has_link(NodeId from, NodeId to) const;

 private:
  int node_count_ = 0;
  std::vector<Link> links_;
  std::string name_;
  std::uint64_t seed_ = 0;
  int generation_attempts_ = 1;
  double mean_capacity_ = 1.0;
};

bool is_strongly_connected(const Topology& topology);

// Connectivity-guaranteed Erdos-Renyi graph: every unordered pair is joined
// (in both directions) with probability p; the draw is repeated until the
// graph is connected. All capacities are set to `mean_capacity`.
Topology generate_connected_er(int n, double p, std::uint64_t seed,
                               int max_attempts = 1000,
                               double mean_capacity = 10.0);

enum class NamedTopology { kAbilene, kBalancedTree, kFog, kGeant };

NamedTopology parse_named_topology(std::string_view name);
std::string to_string(NamedTopology name);

// Embedded edge lists. Every undirected edge becomes two directed links, all
// at the scenario's mean capacity.
Topology load_named_topology(NamedTopology name);

// Redraws every capacity as max(0.05 * mean, Uniform[0, 2 * mean)).
Topology sample_capacities(const Topology& topology, double mean,
                           std::uint64_t seed);

// Line format: "i j C_ij" per link. Comment lines start with '#'; the saver
// writes "# name <name>" and "# nodes <n>" headers which the loader honours.
void save_topology(const Topology& topology, std::ostream& out);
Topology load_topology(std::istream& in);

}  // namespace cec

#endif  // CEC_TOPOLOGY_H
