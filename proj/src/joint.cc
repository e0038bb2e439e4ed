#include "cec/joint.h"

#include <functional>
#include <iomanip>
#include <ostream>

namespace cec {

double joint_utility(const AugmentedGraph& graph,
                     const std::vector<SessionDag>& dags,
                     std::span<const double> rates, const RoutingConfig& routing,
                     const UtilityOracle& oracle, const LinkCostModel& cost) {
  const double u = utility_sum(rates, oracle);
  FlowState flows = propagate(graph, dags, rates, routing);
  return u - total_cost(graph, flows, cost);
}

JointState omad_start(const AugmentedGraph& graph,
                      const std::vector<SessionDag>& dags,
                      const UtilityOracle& monitor, const LinkCostModel& cost,
                      const Allocation& allocation,
                      const AllocParameters& params) {
  JointState state;
  state.allocation = allocation;
  state.routing = RoutingConfig::uniform(dags);
  state.step = params.step;
  state.utility = joint_utility(graph, dags, allocation.rates(), state.routing,
                                monitor, cost);
  return state;
}

double omad_iterate(const AugmentedGraph& graph,
                    const std::vector<SessionDag>& dags,
                    const UtilityOracle& oracle, const UtilityOracle& monitor,
                    const LinkCostModel& cost, const AllocParameters& params,
                    const AllocSolverConfig& config, JointState& state) {
  RoutingSolverConfig one = config.routing;
  one.max_iterations = 1;
  one.trace_residual = false;
  const UtilityEvaluator evaluator = [&](std::span<const double> rates) {
    const double u = utility_sum(rates, oracle);
    return u - omd_rt_solve(graph, dags, rates, state.routing, cost, one).cost;
  };
  const GradientEstimate est =
      two_point_gradient(state.allocation.rates(), evaluator, params.delta);
  state.routing = omd_rt_solve(graph, dags, state.allocation.rates(),
                               state.routing, cost, one)
                      .routing;
  Allocation next = project_box(
      mirror_ascent_step(state.allocation, est.g, state.step), params.delta);
  const double change = next.sup_distance(state.allocation);
  state.allocation = std::move(next);
  state.utility = joint_utility(graph, dags, state.allocation.rates(),
                                state.routing, monitor, cost);
  ++state.iteration;
  return change;
}

JointResult omad_solve(const AugmentedGraph& graph,
                       const std::vector<SessionDag>& dags,
                       const UtilityOracle& oracle, const LinkCostModel& cost,
                       double total_rate, const AllocSolverConfig& config) {
  const int sessions = oracle.session_count();
  if (sessions != graph.session_count()) {
    throw InvalidArgument("utility/session count mismatch");
  }
  const AllocParameters params =
      resolve_parameters(config, oracle, total_rate);
  const UtilityOracle monitor = oracle.clone();
  JointState state =
      omad_start(graph, dags, monitor, cost,
                 Allocation::uniform(sessions, total_rate), params);
  JointResult result;
  result.trace.push_back(
      {0, "omad", state.utility, 0, 0, 0, "", state.allocation.rates()});
  for (int t = 1; t <= config.max_iterations; ++t) {
    const double change =
        omad_iterate(graph, dags, oracle, monitor, cost, params, config, state);
    result.iterations = t;
    result.trace.push_back(
        {t, "omad", state.utility, 0, 0, 0, "", state.allocation.rates()});
    if (change < config.tolerance) {
      result.converged = true;
      break;
    }
  }
  result.allocation = state.allocation;
  result.routing = std::move(state.routing);
  result.utility = state.utility;
  return result;
}

std::vector<JointTraceRow> to_joint_trace(
    const std::vector<AllocTraceRow>& rows) {
  std::vector<JointTraceRow> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    out.push_back({r.iter, "gs_oma", r.utility, 0, 0, 0, "", r.rates});
  }
  return out;
}

void lyapunov_trace(std::vector<JointTraceRow>& rows, double u_star,
                    const AugmentedGraph& graph,
                    const std::vector<SessionDag>& dags,
                    const UtilityOracle& oracle, const LinkCostModel& cost,
                    const RoutingSolverConfig& routing) {
  RoutingSolverConfig solve = routing;
  solve.trace_residual = false;
  for (auto& row : rows) {
    const double best =
        nested_utility(graph, dags, row.rates, oracle, cost, solve);
    row.v1 = u_star - best;
    row.v2 = best - row.utility;
    row.v = row.v1 + row.v2;
  }
}

namespace {

// Drives one algorithm through the switch protocol.
struct SwitchDriver {
  std::function<double(const Instance&)> start;    // returns U
  std::function<double(const Instance&)> iterate;  // returns Lambda change
  std::function<double(const Instance&)> reset;    // returns U on the new instance
  std::function<double()> utility;
  std::function<std::vector<double>()> rates;
  std::function<Allocation()> allocation;
};

SwitchRun RunSwitch(const std::string& algo, SwitchDriver& d,
                    const Instance& before, const Instance& after,
                    int switch_iter, double tolerance) {
  SwitchRun run;
  run.algo = algo;
  const Instance* inst = &before;
  run.trace.push_back({0, algo, d.start(*inst), 0, 0, 0, "", d.rates()});
  for (int t = 1; t <= 4 * switch_iter; ++t) {
    if (t == switch_iter) {
      inst = &after;
      run.first_after_switch = d.reset(*inst);
      run.trace.push_back({t, algo, run.first_after_switch, 0, 0, 0,
                           "topology_switch", d.rates()});
      continue;
    }
    const double change = d.iterate(*inst);
    run.trace.push_back({t, algo, d.utility(), 0, 0, 0, "", d.rates()});
    if (t > switch_iter && change < tolerance) {
      run.reconverged = true;
      run.reconverged_at = t;
      break;
    }
  }
  run.allocation = d.allocation();
  run.utility = d.utility();
  return run;
}

}  // namespace

SwitchExperiment topology_change_experiment(const Instance& before,
                                            const Instance& after,
                                            const UtilityOracle& oracle,
                                            int switch_iter,
                                            const AllocSolverConfig& config) {
  if (switch_iter < 1) throw InvalidArgument("switch_iter must be >= 1");
  if (before.graph.session_count() != after.graph.session_count() ||
      before.total_rate != after.total_rate ||
      oracle.session_count() != before.graph.session_count()) {
    throw InvalidArgument("switched instances must share W, lambda and oracle");
  }
  const AllocParameters params =
      resolve_parameters(config, oracle, before.total_rate);
  const Allocation initial =
      Allocation::uniform(oracle.session_count(), before.total_rate);
  SwitchExperiment out;

  {
    const UtilityOracle monitor = oracle.clone();
    GsOmaState state;
    SwitchDriver d;
    d.start = [&](const Instance& in) {
      state = gs_oma_start(in.graph, in.dags, monitor, in.cost, initial,
                           params, config);
      return state.utility;
    };
    d.iterate = [&](const Instance& in) {
      return gs_oma_iterate(in.graph, in.dags, oracle, monitor, in.cost,
                            params, config, state)
          .change;
    };
    d.reset = [&](const Instance& in) {
      RoutingSolverConfig solve = config.routing;
      solve.trace_residual = false;
      state.utility = nested_utility(in.graph, in.dags, state.allocation.rates(),
                                     monitor, in.cost, solve, &state.routing);
      return state.utility;
    };
    d.utility = [&] { return state.utility; };
    d.rates = [&] { return state.allocation.rates(); };
    d.allocation = [&] { return state.allocation; };
    out.nested =
        RunSwitch("gs_oma", d, before, after, switch_iter, config.tolerance);
  }
  {
    const UtilityOracle monitor = oracle.clone();
    JointState state;
    SwitchDriver d;
    d.start = [&](const Instance& in) {
      state = omad_start(in.graph, in.dags, monitor, in.cost, initial, params);
      return state.utility;
    };
    d.iterate = [&](const Instance& in) {
      return omad_iterate(in.graph, in.dags, oracle, monitor, in.cost, params,
                          config, state);
    };
    d.reset = [&](const Instance& in) {
      state.routing = RoutingConfig::uniform(in.dags);
      state.utility = joint_utility(in.graph, in.dags,
                                    state.allocation.rates(), state.routing,
                                    monitor, in.cost);
      return state.utility;
    };
    d.utility = [&] { return state.utility; };
    d.rates = [&] { return state.allocation.rates(); };
    d.allocation = [&] { return state.allocation; };
    out.single =
        RunSwitch("omad", d, before, after, switch_iter, config.tolerance);
  }
  return out;
}

void write_joint_trace(const std::vector<JointTraceRow>& rows,
                       std::ostream& out) {
  out << "iter,algo,U,V1,V2,V,event\n" << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.iter << ',' << r.algo << ',' << r.utility << ',' << r.v1 << ','
        << r.v2 << ',' << r.v << ',' << r.event << "\n";
  }
}

}  // namespace cec
