#ifndef CEC_SCENARIO_H
#define CEC_SCENARIO_H

#include <cstdint>
#include <string>
#include <vector>

#include "cec/cost.h"
#include "cec/network.h"
#include "cec/topology.h"

namespace cec {

// Everything needed to build one routing instance from a run seed.
struct InstanceSpec {
  std::string topology = "er";  // "er" or a named topology
  int er_nodes = 25;
  double er_probability = 0.2;
  double mean_capacity = 10.0;  // <= 0 means the named topology's default
  int sessions = 3;
  double total_rate = 60.0;
  std::uint64_t topology_seed = 0;   // offsets added to the run seed
  std::uint64_t capacity_seed = 1000;
  std::uint64_t placement_seed = 2000;
  LinkCostModel cost = LinkCostModel::exp_ratio(1.0);
};

struct Instance {
  Topology topology;  // with sampled capacities
  ModelPlacement placement;
  NodeCapacities node_capacities;
  AugmentedGraph graph;
  std::vector<SessionDag> dags;
  LinkCostModel cost;
  double total_rate = 0.0;
};

// Entry nodes default to the hosts of version 0. The placement is redrawn
// (placement seed + attempt) until every session's destination is reachable.
Instance build_instance(const InstanceSpec& spec, std::uint64_t seed);

// Assembles an instance from explicit parts (tests, topology switches).
Instance make_instance(Topology topology, ModelPlacement placement,
                       NodeCapacities capacities, LinkCostModel cost,
                       double total_rate);

}  // namespace cec

#endif  // CEC_SCENARIO_H
