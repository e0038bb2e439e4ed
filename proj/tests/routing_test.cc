#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include "cec/errors.h"
#include "cec/flow.h"
#include "cec/routing.h"
#include "cec/scenario.h"
#include "fixtures.h"

namespace cec {
namespace {

using testing::Net;

const LinkCostModel kExp = LinkCostModel::exp_ratio(1.0);

MarginalCosts Broadcast(const Net& net, const std::vector<double>& rates,
                        const RoutingConfig& r, FlowState* flows = nullptr) {
  FlowState fs = propagate(net.graph, net.dags, rates, r);
  MarginalCosts m = broadcast_marginals(net.graph, net.dags, fs, r, kExp);
  if (flows) *flows = fs;
  return m;
}

double Cost(const AugmentedGraph& g, const std::vector<SessionDag>& dags,
            const std::vector<double>& rates, const RoutingConfig& r,
            const LinkCostModel& cost) {
  return total_cost(g, propagate(g, dags, rates, r), cost);
}

// Minimum of the diamond cost over the split fraction x on a 1e-6 grid.
double DiamondGridMinimum(double ca, double cb, double rate) {
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 1000000; ++k) {
    const double x = k * 1e-6;
    const double fa = rate * x, fb = rate * (1 - x);
    best = std::min(best, 2 * std::exp(fa / ca) + 2 * std::exp(fb / cb));
  }
  return best;
}

RoutingSolverConfig Solver(int iterations, double tolerance = 1e-10) {
  RoutingSolverConfig c;
  c.max_iterations = iterations;
  c.tolerance = tolerance;
  return c;
}

TEST(Broadcast, DiamondHandRecursion) {
  Net net = testing::Diamond();
  const NodeId s = net.graph.source();
  MarginalCosts m = Broadcast(net, {1.0}, RoutingConfig::uniform(net.dags));
  const double d = 0.1 * std::exp(0.05);
  EXPECT_NEAR(m.link[0][s][0], 2 * d, 1e-15);
  EXPECT_NEAR(m.link[0][s][0], 0.2102543, 1e-7);
  EXPECT_NEAR(m.link[0][0][0], d, 1e-15);
  EXPECT_EQ(m.node[0][net.graph.destination(0)], 0.0);
  EXPECT_EQ(m.rounds, 2);
}

TEST(Broadcast, DiamondMatchesFiniteDifference) {
  Net net = testing::Diamond(20.0, 10.0);
  const NodeId s = net.graph.source();
  RoutingConfig r = RoutingConfig::uniform(net.dags);
  r.phi[0][s] = {0.3, 0.7};
  FlowState fs;
  MarginalCosts m = Broadcast(net, {4.0}, r, &fs);
  const double h = 1e-6;
  RoutingConfig up = r, down = r;
  up.phi[0][s] = {0.3 + h, 0.7 - h};
  down.phi[0][s] = {0.3 - h, 0.7 + h};
  const double fd = (Cost(net.graph, net.dags, {4.0}, up, kExp) -
                     Cost(net.graph, net.dags, {4.0}, down, kExp)) / (2 * h);
  const double an = fs.throughput[0][s] * (m.link[0][s][0] - m.link[0][s][1]);
  EXPECT_NEAR(an, fd, 1e-6 * std::abs(an));
}

TEST(Broadcast, ComputeLinkMarginalIsLinkDerivative) {
  Instance in = testing::StandardInstance(1);
  const std::vector<double> rates = {20.0, 20.0, 20.0};
  const RoutingConfig r = RoutingConfig::random(in.dags, 3);
  FlowState fs = propagate(in.graph, in.dags, rates, r);
  MarginalCosts m = broadcast_marginals(in.graph, in.dags, fs, r, in.cost);
  for (int w = 0; w < 3; ++w) {
    for (NodeId i : in.placement.hosts(w)) {
      const auto& outs = in.dags[w].out_links[i];
      ASSERT_EQ(outs.size(), 1u);
      const AugmentedLink& l = in.graph.link(outs[0]);
      EXPECT_EQ(l.to, in.graph.destination(w));
      EXPECT_DOUBLE_EQ(m.link[w][i][0],
                       in.cost.derivative(fs.link_flow[outs[0]], l.capacity));
    }
  }
}

TEST(Broadcast, ChainHeadIsSumOfLinkDerivatives) {
  Net net = testing::Chain3();
  FlowState fs;
  MarginalCosts m = Broadcast(net, {1.0, 0.0}, RoutingConfig::uniform(net.dags), &fs);
  double sum = 0.0;
  int links = 0;
  for (LinkId l : net.dags[0].allowed_links()) {
    sum += kExp.derivative(fs.link_flow[l], net.graph.link(l).capacity);
    ++links;
  }
  EXPECT_EQ(links, 3);
  EXPECT_NEAR(m.node[0][net.graph.source()], sum, 1e-15);
  EXPECT_EQ(m.rounds, 3);
}

TEST(Broadcast, NodeMarginalIsRoutedAverage) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Instance in = testing::StandardInstance(seed);
    const std::vector<double> rates = {10.0, 20.0, 30.0};
    const RoutingConfig r = RoutingConfig::random(in.dags, seed);
    FlowState fs = propagate(in.graph, in.dags, rates, r);
    MarginalCosts m = broadcast_marginals(in.graph, in.dags, fs, r, in.cost);
    int longest = 0;
    for (int w = 0; w < 3; ++w) {
      longest = std::max(longest, in.dags[w].longest_path);
      EXPECT_EQ(m.node[w][in.graph.destination(w)], 0.0);
      for (NodeId i : in.dags[w].order) {
        const auto& outs = in.dags[w].out_links[i];
        if (outs.empty()) continue;
        double avg = 0.0;
        for (size_t k = 0; k < outs.size(); ++k) {
          avg += r.phi[w][i][k] * m.link[w][i][k];
          EXPECT_NEAR(m.link[w][i][k],
                      in.cost.derivative(fs.link_flow[outs[k]],
                                         in.graph.link(outs[k]).capacity) +
                          m.node[w][in.graph.link(outs[k]).to],
                      1e-12 * (1.0 + std::abs(m.link[w][i][k])));
        }
        EXPECT_NEAR(m.node[w][i], avg, 1e-12 * (1.0 + std::abs(avg)));
      }
    }
    EXPECT_LE(m.rounds, longest);
  }
}

// Central finite difference of D along e_j - e_k inside one routing row.
constexpr double kEps = std::numeric_limits<double>::epsilon();

TEST(Broadcast, GradientMatchesFiniteDifferenceOnRandomTriples) {
  std::mt19937_64 rng(5);
  int checked = 0;
  int failures = 0;
  while (checked < 100) {
    Instance in = testing::StandardInstance(1 + rng() % 10);
    std::exponential_distribution<double> e(1.0);
    std::vector<double> rates = {e(rng), e(rng), e(rng)};
    const double s = rates[0] + rates[1] + rates[2];
    for (double& x : rates) x *= 60.0 / s;
    const RoutingConfig r = RoutingConfig::random(in.dags, rng());
    FlowState fs = propagate(in.graph, in.dags, rates, r);
    MarginalCosts m = broadcast_marginals(in.graph, in.dags, fs, r, in.cost);
    const int w = static_cast<int>(rng() % 3);
    const auto& order = in.dags[w].order;
    const NodeId i = order[rng() % order.size()];
    const auto& row = r.phi[w][i];
    if (row.size() < 2 || fs.throughput[w][i] <= 0.0) continue;
    const size_t j = rng() % row.size();
    size_t k = rng() % (row.size() - 1);
    if (k >= j) ++k;
    if (row[j] < 1e-3 || row[k] < 1e-3) continue;
    const double h = 1e-5;
    const double t = fs.throughput[w][i];
    const double gj = t * m.link[w][i][j], gk = t * m.link[w][i][k];
    // Round-off in D limits the difference quotient to about eps * D / h.
    if (4 * kEps * Cost(in.graph, in.dags, rates, r, in.cost) / h >
        1e-6 * (std::abs(gj) + std::abs(gk))) {
      continue;
    }
    RoutingConfig up = r, down = r;
    up.phi[w][i][j] += h;
    up.phi[w][i][k] -= h;
    down.phi[w][i][j] -= h;
    down.phi[w][i][k] += h;
    const double fd = (Cost(in.graph, in.dags, rates, up, in.cost) -
                       Cost(in.graph, in.dags, rates, down, in.cost)) / (2 * h);
    if (std::abs((gj - gk) - fd) > 1e-5 * (std::abs(gj) + std::abs(gk))) ++failures;
    ++checked;
  }
  EXPECT_EQ(failures, 0);
}

TEST(OmdRtStep, EqualMarginalsLeaveRowUnchanged) {
  Net net = testing::Diamond();
  const NodeId s = net.graph.source();
  RoutingConfig r = RoutingConfig::uniform(net.dags);
  r.phi[0][s] = {0.3, 0.7};
  FlowState fs;
  MarginalCosts m = Broadcast(net, {1.0}, r, &fs);
  m.link[0][s] = {1.7, 1.7};
  RoutingConfig next = omd_rt_step(r, fs, m, 0.8);
  EXPECT_NEAR(next.phi[0][s][0], 0.3, 1e-15);
  EXPECT_NEAR(next.phi[0][s][1], 0.7, 1e-15);
}

TEST(OmdRtStep, HandEvaluatedUpdate) {
  Net net = testing::Diamond();
  const NodeId s = net.graph.source();
  RoutingConfig r = RoutingConfig::uniform(net.dags);
  FlowState fs;
  MarginalCosts m = Broadcast(net, {1.0}, r, &fs);
  m.link[0][s] = {0.0, std::log(4.0)};
  RoutingConfig next = omd_rt_step(r, fs, m, 0.5);
  EXPECT_NEAR(next.phi[0][s][0], 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(next.phi[0][s][1], 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(next.phi[0][s][0] + next.phi[0][s][1], 1.0, 1e-12);
}

TEST(OmdRtStep, ZeroStepAndIdleRows) {
  Instance in = testing::StandardInstance(2);
  const RoutingConfig r = RoutingConfig::random(in.dags, 8);
  const std::vector<double> rates = {0.0, 30.0, 30.0};
  FlowState fs = propagate(in.graph, in.dags, rates, r);
  MarginalCosts m = broadcast_marginals(in.graph, in.dags, fs, r, in.cost);
  EXPECT_LE(omd_rt_step(r, fs, m, 0.0).sup_distance(r), 1e-15);
  RoutingConfig next = omd_rt_step(r, fs, m, 1.0);
  EXPECT_EQ(next.phi[0], r.phi[0]);
  EXPECT_GT(next.sup_distance(r), 0.0);
  EXPECT_NO_THROW(validate_routing(next, in.dags));
}

TEST(OmdRtStep, ShrinkIsBounded) {
  Net net = testing::Diamond();
  const NodeId s = net.graph.source();
  RoutingConfig r = RoutingConfig::uniform(net.dags);
  FlowState fs;
  MarginalCosts m = Broadcast(net, {1.0}, r, &fs);
  m.link[0][s] = {0.0, 1e6};
  RoutingConfig next = omd_rt_step(r, fs, m, 1.0, 10.0);
  EXPECT_NEAR(next.phi[0][s][1] / next.phi[0][s][0], std::exp(-10.0), 1e-15);
}

TEST(OmdRtSolve, SymmetricDiamondFixedPoint) {
  Net net = testing::Diamond();
  const std::vector<double> rates = {1.0};
  RoutingResult res = omd_rt_solve(net.graph, net.dags, rates,
                                   RoutingConfig::uniform(net.dags), kExp, Solver(100));
  EXPECT_NEAR(res.routing.phi[0][net.graph.source()][0], 0.5, 1e-12);
  EXPECT_TRUE(res.converged);
}

TEST(OmdRtSolve, AsymmetricDiamondMatchesOpt) {
  Net net = testing::Diamond(20.0, 10.0);
  const std::vector<double> rates = {12.0};
  RoutingResult res = omd_rt_solve(net.graph, net.dags, rates,
                                   RoutingConfig::uniform(net.dags), kExp, Solver(5000));
  EXPECT_GT(res.routing.phi[0][net.graph.source()][0], 0.5);
  OptResult opt = opt_baseline(net.graph, net.dags, rates, kExp);
  EXPECT_NEAR(res.cost, opt.cost, 1e-4 * opt.cost);
  EXPECT_NEAR(opt.cost, DiamondGridMinimum(20.0, 10.0, 12.0), 1e-9);
}

TEST(OmdRtSolve, IterationBudgetRespected) {
  Instance in = testing::StandardInstance(1);
  const std::vector<double> rates = {20.0, 20.0, 20.0};
  RoutingResult res = omd_rt_solve(in.graph, in.dags, rates,
                                   RoutingConfig::uniform(in.dags), in.cost, Solver(1));
  EXPECT_EQ(res.iterations, 1);
  EXPECT_EQ(res.trace.size(), 2u);
  EXPECT_FALSE(res.converged);
}

TEST(OmdRtSolve, MonotoneDescentOnStandardInstances) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Instance in = testing::StandardInstance(seed);
    const std::vector<double> rates = {20.0, 20.0, 20.0};
    RoutingResult res = omd_rt_solve(in.graph, in.dags, rates,
                                     RoutingConfig::uniform(in.dags), in.cost, Solver(300));
    for (size_t k = 1; k < res.trace.size(); ++k) {
      EXPECT_LE(res.trace[k].cost, res.trace[k - 1].cost + 1e-10) << "seed " << seed;
    }
  }
}

TEST(OmdRtSolve, KktResidualAtConvergence) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    Instance in = testing::StandardInstance(seed);
    const std::vector<double> rates = {20.0, 20.0, 20.0};
    RoutingResult res = omd_rt_solve(in.graph, in.dags, rates,
                                     RoutingConfig::uniform(in.dags), in.cost,
                                     Solver(50000));
    ASSERT_TRUE(res.converged) << "seed " << seed;
    MarginalCosts m =
        broadcast_marginals(in.graph, in.dags, res.flows, res.routing, in.cost);
    OptimalityResidualR kkt =
        theorem3_residual(in.graph, in.dags, res.flows, m, res.routing);
    EXPECT_LT(kkt.max_spread, 1e-4 * (1.0 + kkt.mean_marginal)) << "seed " << seed;
    EXPECT_GE(kkt.max_spread, 0.0);
  }
}

TEST(OmdRtSolve, FixedPointBarelyMoves) {
  Net net = testing::TwinSessions();
  const std::vector<double> rates = {7.0, 7.0};
  RoutingResult res = omd_rt_solve(net.graph, net.dags, rates,
                                   RoutingConfig::uniform(net.dags), kExp, Solver(5000));
  MarginalCosts m = broadcast_marginals(net.graph, net.dags, res.flows, res.routing, kExp);
  OptimalityResidualR kkt = theorem3_residual(net.graph, net.dags, res.flows, m, res.routing);
  ASSERT_LT(kkt.max_spread, 1e-10);
  RoutingConfig next = omd_rt_step(res.routing, res.flows, m, 1.0);
  EXPECT_LT(next.sup_distance(res.routing), 1e-8);
}

TEST(Theorem3Residual, Examples) {
  Net sym = testing::Diamond();
  const std::vector<double> one = {1.0};
  FlowState fs;
  MarginalCosts m = Broadcast(sym, one, RoutingConfig::uniform(sym.dags), &fs);
  OptimalityResidualR r =
      theorem3_residual(sym.graph, sym.dags, fs, m, RoutingConfig::uniform(sym.dags));
  EXPECT_LT(r.max_spread, 1e-15);
  EXPECT_NEAR(r.multiplier[0][sym.graph.source()], -m.link[0][sym.graph.source()][0],
              1e-15);

  Net asym = testing::Diamond(20.0, 10.0);
  const std::vector<double> rates = {12.0};
  m = Broadcast(asym, rates, RoutingConfig::uniform(asym.dags), &fs);
  r = theorem3_residual(asym.graph, asym.dags, fs, m, RoutingConfig::uniform(asym.dags));
  EXPECT_GT(r.max_spread, 0.0);
  EXPECT_EQ(r.worst_node, asym.graph.source());

  Net chain = testing::Chain();
  m = Broadcast(chain, one, RoutingConfig::uniform(chain.dags), &fs);
  r = theorem3_residual(chain.graph, chain.dags, fs, m, RoutingConfig::uniform(chain.dags));
  EXPECT_EQ(r.max_spread, 0.0);
}

TEST(Theorem3Residual, UnusedCheapLinkIsViolation) {
  Net net = testing::Diamond(20.0, 10.0);
  const NodeId s = net.graph.source();
  RoutingConfig r = RoutingConfig::uniform(net.dags);
  r.phi[0][s] = {0.0, 1.0};
  const std::vector<double> rates = {12.0};
  FlowState fs;
  MarginalCosts m = Broadcast(net, rates, r, &fs);
  OptimalityResidualR res = theorem3_residual(net.graph, net.dags, fs, m, r);
  EXPECT_EQ(res.max_spread, 0.0);
  EXPECT_GT(res.max_kkt_violation, 0.0);
}

TEST(PgdBaseline, SymmetricAndZeroStep) {
  Net net = testing::Diamond();
  const NodeId s = net.graph.source();
  RoutingConfig start = RoutingConfig::uniform(net.dags);
  start.phi[0][s] = {0.2, 0.8};
  const std::vector<double> rates = {1.0};
  RoutingResult res = pgd_routing_baseline(net.graph, net.dags, rates, start, kExp,
                                           Solver(2000));
  EXPECT_NEAR(res.routing.phi[0][s][0], 0.5, 1e-6);

  FlowState fs;
  MarginalCosts m = Broadcast(net, rates, start, &fs);
  EXPECT_EQ(pgd_step(start, fs, m, 0.0).sup_distance(start), 0.0);
}

TEST(PgdBaseline, StepProjectsOntoSimplex) {
  Net net = testing::Diamond();
  const NodeId s = net.graph.source();
  RoutingConfig r = RoutingConfig::uniform(net.dags);
  FlowState fs;
  MarginalCosts m = Broadcast(net, {2.0}, r, &fs);
  m.link[0][s] = {0.0, 1.0};
  // phi - eta t delta = (0.5, 0.5 - 0.2 * 2) = (0.5, 0.1) -> shift 0.2.
  RoutingConfig next = pgd_step(r, fs, m, 0.2);
  EXPECT_NEAR(next.phi[0][s][0], 0.7, 1e-15);
  EXPECT_NEAR(next.phi[0][s][1], 0.3, 1e-15);
  m.link[0][s] = {0.0, 10.0};
  next = pgd_step(r, fs, m, 1.0);
  EXPECT_EQ(next.phi[0][s][0], 1.0);
  EXPECT_EQ(next.phi[0][s][1], 0.0);
}

TEST(PgdBaseline, EarlyGapAgainstOmdRtRecorded) {
  int pgd_behind = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Instance in = testing::StandardInstance(seed);
    const std::vector<double> rates = {20.0, 20.0, 20.0};
    const RoutingConfig start = RoutingConfig::uniform(in.dags);
    const double omd =
        omd_rt_solve(in.graph, in.dags, rates, start, in.cost, Solver(10)).cost;
    const double pgd =
        pgd_routing_baseline(in.graph, in.dags, rates, start, in.cost, Solver(10)).cost;
    pgd_behind += pgd >= omd - 1e-9;
  }
  RecordProperty("pgd_behind_at_10_of_20", pgd_behind);
  std::printf("pgd cost >= omd_rt cost at iteration 10 on %d of 20 seeds\n", pgd_behind);
}

TEST(OptBaseline, SymmetricDiamond) {
  Net net = testing::Diamond();
  const std::vector<double> rates = {1.0};
  OptResult opt = opt_baseline(net.graph, net.dags, rates, kExp);
  EXPECT_NEAR(opt.cost, 4 * std::exp(0.05), 1e-12);
  EXPECT_NEAR(opt.cost, DiamondGridMinimum(10.0, 10.0, 1.0), 1e-12);
  for (double f : opt.link_flow) EXPECT_NEAR(f, 0.5, 1e-6);
}

TEST(OptBaseline, SinglePathNetwork) {
  Net net = testing::Chain3();
  const std::vector<double> rates = {3.0, 0.0};
  OptResult opt = opt_baseline(net.graph, net.dags, rates, kExp);
  EXPECT_NEAR(opt.cost, Cost(net.graph, net.dags, rates, RoutingConfig::uniform(net.dags), kExp),
              1e-12);
}

TEST(OptBaseline, LowerBoundsConvergedOmdRt) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Instance in = testing::StandardInstance(seed);
    const std::vector<double> rates = {20.0, 20.0, 20.0};
    OptResult opt = opt_baseline(in.graph, in.dags, rates, in.cost);
    RoutingResult omd = omd_rt_solve(in.graph, in.dags, rates,
                                     RoutingConfig::uniform(in.dags), in.cost,
                                     Solver(50000));
    EXPECT_LE(opt.cost, omd.cost + 1e-6 * (1.0 + opt.cost)) << "seed " << seed;
    EXPECT_NEAR(opt.cost, omd.cost, 1e-6 * opt.cost) << "seed " << seed;
    EXPECT_LE(opt.gap, 1e-8 * opt.cost);
    double sum = 0.0;
    for (LinkId l : in.graph.out_links(in.graph.source())) sum += opt.link_flow[l];
    EXPECT_NEAR(sum, 60.0, 1e-9);
  }
}

TEST(OptBaseline, Mm1InfeasibleRate) {
  Net net = testing::Diamond(1.0, 1.0);
  const std::vector<double> rates = {3.0};
  EXPECT_THROW(opt_baseline(net.graph, net.dags, rates, LinkCostModel::mm1()),
               CapacityExceeded);
}

TEST(OmdRtSolve, Mm1FeasibleInstanceConverges) {
  Net net = testing::Diamond(4.0, 2.0);
  const std::vector<double> rates = {3.0};
  RoutingResult res = omd_rt_solve(net.graph, net.dags, rates,
                                   RoutingConfig::uniform(net.dags),
                                   LinkCostModel::mm1(), Solver(5000));
  OptResult opt = opt_baseline(net.graph, net.dags, rates, LinkCostModel::mm1());
  EXPECT_NEAR(res.cost, opt.cost, 1e-6 * opt.cost);
}

TEST(RoutingTrace, CsvLayout) {
  std::ostringstream out;
  write_routing_trace({{0, 2.5, 0.125, 0.0}, {1, 2.25, 0.0625, 0.5}}, out);
  EXPECT_EQ(out.str(),
            "iter,D,residual_spread,phi_change\n0,2.5,0.125,0\n1,2.25,0.0625,0.5\n");
}

}  // namespace
}  // namespace cec
