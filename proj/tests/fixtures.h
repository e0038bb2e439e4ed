#ifndef CEC_TESTS_FIXTURES_H
#define CEC_TESTS_FIXTURES_H

#include <cstdint>
#include <vector>

#include "cec/allocate.h"
#include "cec/network.h"
#include "cec/scenario.h"
#include "cec/topology.h"
#include "cec/utility.h"

namespace cec::testing {

struct Net {
  AugmentedGraph graph;
  std::vector<SessionDag> dags;
};

inline Net BuildNet(const Topology& topology, const ModelPlacement& placement,
                    const std::vector<NodeId>& entry,
                    const NodeCapacities& capacities) {
  Net net;
  net.graph = augment(topology, placement, entry, capacities);
  net.dags = build_session_dags(net.graph);
  return net;
}

// S -> {a, b} -> D_1 with a = 0, b = 1, both hosting the only version.
// Link ids: (S,a) 0, (S,b) 1, (a,D) 2, (b,D) 3. The a-path has capacity
// `ca` on both links, the b-path `cb`.
inline Net Diamond(double ca = 10.0, double cb = 10.0) {
  NodeCapacities caps{{ca, cb}, {ca, cb}};
  return BuildNet(Topology(2, {}), ModelPlacement({0, 0}, 1), {0, 1}, caps);
}

// S -> a -> D_1 with a single physical node.
inline Net Chain(double c = 10.0) {
  NodeCapacities caps{{c}, {c}};
  return BuildNet(Topology(1, {}), ModelPlacement({0}, 1), {0}, caps);
}

// Session 0 path S -> a -> b -> D_0; a hosts version 1 so it must relay.
inline Net Chain3(double c = 10.0) {
  NodeCapacities caps{{c, c}, {c, c}};
  return BuildNet(Topology(2, {{0, 1, c}}), ModelPlacement({1, 0}, 2), {0},
                  caps);
}

// Two sessions served by mirror-image nodes: S -> 0 -> D_0, S -> 1 -> D_1,
// plus the physical links 0 <-> 1.
inline Net TwinSessions(double c = 40.0) {
  NodeCapacities caps{{c, c}, {c, c}};
  return BuildNet(Topology(2, {{0, 1, c}, {1, 0, c}}),
                  ModelPlacement({0, 1}, 2), {0, 1}, caps);
}

// The standard instance: Connected-ER(25, 0.2), mean capacity 10, W = 3,
// lambda = 60, exp(F/C) cost.
inline Instance StandardInstance(std::uint64_t seed) {
  return build_instance(InstanceSpec{}, seed);
}

inline UtilityOracle LogOracle(double total = 60.0) {
  return UtilityOracle({UtilityKind::kLogarithmic, {10.0, 15.0, 20.0},
                        {0.1, 0.1, 0.1}},
                       total);
}

// The committed experiment settings: eta = 1, probe tolerance 1e-8.
inline AllocSolverConfig StandardAllocConfig() {
  AllocSolverConfig config;
  config.step_size = 1.0;
  config.routing.tolerance = 1e-8;
  config.routing.trace_residual = false;
  return config;
}

}  // namespace cec::testing

#endif  // CEC_TESTS_FIXTURES_H
