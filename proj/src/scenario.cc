#include "cec/scenario.h"

#include "cec/errors.h"

namespace cec {

Instance make_instance(Topology topology, ModelPlacement placement,
                       NodeCapacities capacities, LinkCostModel cost,
                       double total_rate) {
  Instance instance;
  instance.topology = std::move(topology);
  instance.placement = std::move(placement);
  instance.node_capacities = std::move(capacities);
  instance.cost = cost;
  instance.total_rate = total_rate;
  instance.graph = augment(instance.topology, instance.placement,
                           instance.placement.hosts(0),
                           instance.node_capacities);
  instance.dags = build_session_dags(instance.graph);
  return instance;
}

Instance build_instance(const InstanceSpec& spec, std::uint64_t seed) {
  if (!(spec.total_rate > 0.0)) throw InvalidArgument("lambda must be positive");
  Topology base;
  if (spec.topology == "er") {
    base = generate_connected_er(spec.er_nodes, spec.er_probability,
                                 spec.topology_seed + seed);
  } else {
    base = load_named_topology(parse_named_topology(spec.topology));
  }
  const double mean =
      spec.mean_capacity > 0.0 ? spec.mean_capacity : base.mean_capacity();
  Topology sampled = sample_capacities(base, mean, spec.capacity_seed + seed);
  NodeCapacities caps = sample_node_capacities(
      sampled.node_count(), mean, spec.capacity_seed + seed + 7919);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    ModelPlacement placement = random_placement(
        sampled.node_count(), spec.sessions,
        spec.placement_seed + seed + 104729ULL * attempt);
    try {
      return make_instance(sampled, std::move(placement), caps, spec.cost,
                           spec.total_rate);
    } catch (const TopologyError&) {
      continue;
    }
  }
  throw TopologyError("no placement reaches every destination");
}

}  // namespace cec
