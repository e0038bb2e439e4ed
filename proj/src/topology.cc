#include "cec/topology.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <utility>

#include "cec/errors.h"

namespace cec {
namespace {

using EdgeList = std::vector<std::pair<int, int>>;

// Abilene backbone (Internet2 predecessor), 11 PoPs.
// 0 Seattle, 1 Sunnyvale, 2 Los Angeles, 3 Denver, 4 Kansas City,
// 5 Houston, 6 Chicago, 7 Indianapolis, 8 Atlanta, 9 Washington, 10 New York.
const EdgeList kAbileneEdges = {
    {0, 1}, {0, 3},  {1, 2}, {1, 3}, {2, 5}, {3, 4}, {4, 5},
    {4, 7}, {5, 8},  {6, 7}, {6, 10}, {7, 8}, {8, 9}, {9, 10},
};

// Complete binary tree over 14 nodes (parent of k is (k-1)/2) plus a chain
// across each level, 23 edges in total.
EdgeList BalancedTreeEdges() {
  EdgeList edges;
  for (int k = 1; k < 14; ++k) edges.emplace_back((k - 1) / 2, k);
  const std::vector<std::pair<int, int>> levels = {{1, 2}, {3, 6}, {7, 13}};
  for (const auto& [first, last] : levels) {
    for (int k = first; k < last; ++k) edges.emplace_back(k, k + 1);
  }
  return edges;
}

// Three-tier fog network: node 0 is the cloud, 1..4 fog nodes joined in a
// ring, 5..14 edge devices each dual-homed to two adjacent fog nodes, plus two
// device-to-device links. 30 edges.
EdgeList FogEdges() {
  EdgeList edges;
  for (int f = 1; f <= 4; ++f) edges.emplace_back(0, f);
  for (int f = 1; f <= 4; ++f) edges.emplace_back(f, f % 4 + 1);
  for (int e = 5; e < 15; ++e) {
    int primary = 1 + (e - 5) % 4;
    edges.emplace_back(primary, e);
    edges.emplace_back(primary % 4 + 1, e);
  }
  edges.emplace_back(5, 6);
  edges.emplace_back(10, 11);
  return edges;
}

// GEANT pan-European research network, 22 national PoPs.
// 0 AT, 1 BE, 2 CH, 3 CZ, 4 DE, 5 DK, 6 ES, 7 FR, 8 GR, 9 HR, 10 HU,
// 11 IE, 12 IL, 13 IT, 14 LU, 15 NL, 16 PL, 17 PT, 18 SE, 19 SI, 20 SK, 21 UK.
const EdgeList kGeantEdges = {
    {0, 4},   {0, 2},   {0, 10},  {0, 19},  {0, 20},  {0, 3},   {1, 15},
    {1, 7},   {1, 14},  {2, 7},   {2, 13},  {2, 4},   {3, 4},   {3, 16},
    {3, 20},  {4, 5},   {4, 15},  {4, 7},   {4, 13},  {4, 12},  {5, 18},
    {6, 7},   {6, 17},  {6, 13},  {7, 21},  {7, 14},  {8, 13},  {9, 10},
    {9, 19},  {11, 21}, {15, 21}, {16, 18}, {17, 21},
};

Topology FromEdges(int n, const EdgeList& edges, std::string name,
                   double mean_capacity) {
  std::vector<Link> links;
  links.reserve(edges.size() * 2);
  for (const auto& [a, b] : edges) {
    links.push_back({a, b, mean_capacity});
    links.push_back({b, a, mean_capacity});
  }
  Topology topology(n, std::move(links), std::move(name));
  topology.set_mean_capacity(mean_capacity);
  return topology;
}

std::vector<std::vector<NodeId>> Adjacency(const Topology& topology,
                                           bool reverse) {
  std::vector<std::vector<NodeId>> adj(topology.node_count());
  for (const Link& link : topology.links()) {
    if (reverse) {
      adj[link.to].push_back(link.from);
    } else {
      adj[link.from].push_back(link.to);
    }
  }
  return adj;
}

bool ReachesAll(const std::vector<std::vector<NodeId>>& adj) {
  if (adj.empty()) return true;
  std::vector<char> seen(adj.size(), 0);
  std::queue<NodeId> frontier;
  frontier.push(0);
  seen[0] = 1;
  size_t count = 1;
  while (!frontier.empty()) {
    NodeId u = frontier.front();
    frontier.pop();
    for (NodeId v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        frontier.push(v);
      }
    }
  }
  return count == adj.size();
}

}  // namespace

Topology::Topology(int node_count, std::vector<Link> links, std::string name,
                   std::uint64_t seed)
    : node_count_(node_count),
      links_(std::move(links)),
      name_(std::move(name)),
      seed_(seed) {
  if (node_count_ < 0) throw InvalidArgument("negative node count");
  std::set<std::pair<NodeId, NodeId>> seen;
  for (const Link& link : links_) {
    if (link.from < 0 || link.from >= node_count_ || link.to < 0 ||
        link.to >= node_count_) {
      throw InvalidArgument("link endpoint out of range");
    }
    if (link.from == link.to) throw InvalidArgument("self-loop");
    if (!(link.capacity > 0.0) || !std::isfinite(link.capacity)) {
      throw InvalidArgument("link capacity must be positive and finite");
    }
    if (!seen.emplace(link.from, link.to).second) {
      throw InvalidArgument("duplicate link");
    }
  }
}

int Topology::undirected_edge_count() const {
  std::set<std::pair<NodeId, NodeId>> pairs;
  for (const Link& link : links_) {
    pairs.emplace(std::min(link.from, link.to), std::max(link.from, link.to));
  }
  return static_cast<int>(pairs.size());
}

bool Topology::has_link(NodeId from, NodeId to) const {
  return std::any_of(links_.begin(), links_.end(), [&](const Link& link) {
    return link.from == from && link.to == to;
  });
}

bool is_strongly_connected(const Topology& topology) {
  return ReachesAll(Adjacency(topology, false)) &&
         ReachesAll(Adjacency(topology, true));
}

Topology generate_connected_er(int n, double p, std::uint64_t seed,
                               int max_attempts, double mean_capacity) {
  if (n < 2) throw InvalidArgument("ER graph needs n >= 2");
  if (!(p > 0.0 && p <= 1.0)) throw InvalidArgument("ER probability not in (0, 1]");
  if (max_attempts < 1) throw InvalidArgument("attempt budget must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    std::vector<Link> links;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (coin(rng) < p) {
          links.push_back({i, j, mean_capacity});
          links.push_back({j, i, mean_capacity});
        }
      }
    }
    Topology topology(n, std::move(links), "er", seed);
    if (is_strongly_connected(topology)) {
      topology.set_generation_attempts(attempt);
      topology.set_mean_capacity(mean_capacity);
      return topology;
    }
  }
  throw TopologyError("connectivity unreachable");
}

NamedTopology parse_named_topology(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  lower.erase(std::remove(lower.begin(), lower.end(), '-'), lower.end());
  lower.erase(std::remove(lower.begin(), lower.end(), '_'), lower.end());
  if (lower == "abilene") return NamedTopology::kAbilene;
  if (lower == "balancedtree" || lower == "balancetree") {
    return NamedTopology::kBalancedTree;
  }
  if (lower == "fog") return NamedTopology::kFog;
  if (lower == "geant") return NamedTopology::kGeant;
  throw InvalidArgument("unknown topology name: " + std::string(name));
}

std::string to_string(NamedTopology name) {
  switch (name) {
    case NamedTopology::kAbilene:
      return "Abilene";
    case NamedTopology::kBalancedTree:
      return "BalancedTree";
    case NamedTopology::kFog:
      return "Fog";
    case NamedTopology::kGeant:
      return "GEANT";
  }
  return "unknown";
}

Topology load_named_topology(NamedTopology name) {
  switch (name) {
    case NamedTopology::kAbilene:
      return FromEdges(11, kAbileneEdges, "Abilene", 15.0);
    case NamedTopology::kBalancedTree:
      return FromEdges(14, BalancedTreeEdges(), "BalancedTree", 10.0);
    case NamedTopology::kFog:
      return FromEdges(15, FogEdges(), "Fog", 10.0);
    case NamedTopology::kGeant:
      return FromEdges(22, kGeantEdges, "GEANT", 10.0);
  }
  throw InvalidArgument("unknown topology");
}

Topology sample_capacities(const Topology& topology, double mean,
                           std::uint64_t seed) {
  if (!(mean > 0.0)) throw InvalidArgument("mean capacity must be positive");
  const double floor = 0.05 * mean;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> draw(0.0, 2.0 * mean);
  std::vector<Link> links = topology.links();
  for (Link& link : links) link.capacity = std::max(floor, draw(rng));
  Topology out(topology.node_count(), std::move(links), topology.name(),
               topology.seed());
  out.set_generation_attempts(topology.generation_attempts());
  out.set_mean_capacity(mean);
  return out;
}

void save_topology(const Topology& topology, std::ostream& out) {
  out << "# name " << (topology.name().empty() ? "-" : topology.name()) << "\n";
  out << "# nodes " << topology.node_count() << "\n";
  out << std::setprecision(17);
  for (const Link& link : topology.links()) {
    out << link.from << ' ' << link.to << ' ' << link.capacity << "\n";
  }
}

Topology load_topology(std::istream& in) {
  std::string line;
  std::string name;
  int declared_nodes = -1;
  int max_id = -1;
  std::vector<Link> links;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string first;
    if (!(fields >> first)) continue;
    if (first[0] == '#') {
      std::string key;
      std::string rest = first.size() > 1 ? first.substr(1) : "";
      if (rest.empty()) fields >> key; else key = rest;
      if (key == "name") {
        fields >> name;
        if (name == "-") name.clear();
      } else if (key == "nodes") {
        fields >> declared_nodes;
      }
      continue;
    }
    Link link;
    std::istringstream row(line);
    if (!(row >> link.from >> link.to >> link.capacity)) {
      throw InvalidArgument("topology line " + std::to_string(line_no) +
                            ": expected 'i j C_ij'");
    }
    max_id = std::max({max_id, link.from, link.to});
    links.push_back(link);
  }
  int n = declared_nodes >= 0 ? declared_nodes : max_id + 1;
  double total = 0.0;
  for (const Link& link : links) total += link.capacity;
  Topology topology(n, std::move(links), name);
  if (topology.link_count() > 0) {
    topology.set_mean_capacity(total / topology.link_count());
  }
  return topology;
}

}  // namespace cec
