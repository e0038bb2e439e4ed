#include "cec/allocate.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>

namespace cec {

PerturbationError::PerturbationError(int session, int sign,
                                     const std::string& what)
    : Error("perturbation " + std::string(sign > 0 ? "+" : "-") +
            "delta e_" + std::to_string(session) + ": " + what),
      session_(session),
      sign_(sign) {}

GradientEstimate two_point_gradient(std::span<const double> rates,
                                    const UtilityEvaluator& evaluator,
                                    double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("delta must be > 0");
  const int sessions = static_cast<int>(rates.size());
  std::vector<double> probe(rates.begin(), rates.end());
  GradientEstimate est;
  est.g.resize(sessions);
  est.u_plus.resize(sessions);
  est.u_minus.resize(sessions);
  auto observe = [&](int w, int sign) {
    probe[w] = rates[w] + sign * delta;
    if (probe[w] < 0.0) {
      throw PerturbationError(w, sign, "rate below zero");
    }
    double u;
    try {
      u = evaluator(probe);
    } catch (const std::exception& e) {
      throw PerturbationError(w, sign, e.what());
    }
    probe[w] = rates[w];
    return u;
  };
  for (int w = 0; w < sessions; ++w) {
    est.u_plus[w] = observe(w, +1);
    est.u_minus[w] = observe(w, -1);
    est.g[w] = (est.u_plus[w] - est.u_minus[w]) / (2.0 * delta);
    if (!std::isfinite(est.g[w])) {
      throw NumericalError("non-finite gradient estimate for session " +
                           std::to_string(w));
    }
  }
  return est;
}

namespace {

// Pushes the rounding residue of a renormalised vector onto its largest entry.
void RestoreSum(std::vector<double>& x, double total) {
  double sum = 0.0;
  for (double v : x) sum += v;
  auto largest = std::max_element(x.begin(), x.end());
  *largest += total - sum;
}

}  // namespace

Allocation mirror_ascent_step(const Allocation& allocation,
                              std::span<const double> g, double eta) {
  const int sessions = allocation.size();
  if (static_cast<int>(g.size()) != sessions) {
    throw InvalidArgument("gradient/allocation dimension mismatch");
  }
  if (!(eta >= 0.0)) throw InvalidArgument("eta must be >= 0");
  std::vector<double> log_weight(sessions);
  double shift = -std::numeric_limits<double>::infinity();
  for (int w = 0; w < sessions; ++w) {
    if (!(allocation[w] > 0.0)) {
      throw InvalidArgument("mirror ascent needs strictly positive rates");
    }
    log_weight[w] = std::log(allocation[w]) + eta * g[w];
    shift = std::max(shift, log_weight[w]);
  }
  std::vector<double> next(sessions);
  double sum = 0.0;
  for (int w = 0; w < sessions; ++w) {
    next[w] = std::exp(log_weight[w] - shift);
    sum += next[w];
  }
  const double total = allocation.total();
  for (double& x : next) x = total * x / sum;
  RestoreSum(next, total);
  return Allocation(std::move(next), total);
}

Allocation project_box(const Allocation& allocation, double delta) {
  const int sessions = allocation.size();
  const double total = allocation.total();
  const double lo = delta;
  const double hi = total - delta;
  if (!(delta >= 0.0) || sessions * lo > total + 1e-12 ||
      sessions * hi < total - 1e-12) {
    throw InvalidArgument("infeasible box: lambda < W * delta");
  }
  const auto& x = allocation.rates();
  // x_w(tau) = clamp(x_w - tau, lo, hi); the sum is nonincreasing in tau.
  auto sum_at = [&](double tau) {
    double s = 0.0;
    for (double v : x) s += std::clamp(v - tau, lo, hi);
    return s;
  };
  std::vector<double> breaks;
  breaks.reserve(2 * sessions);
  for (double v : x) {
    breaks.push_back(v - lo);
    breaks.push_back(v - hi);
  }
  std::sort(breaks.begin(), breaks.end());
  double tau = breaks.back();
  for (size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double s0 = sum_at(breaks[k]);
    const double s1 = sum_at(breaks[k + 1]);
    if (s0 >= total && total >= s1) {
      tau = s0 > s1 ? breaks[k] + (s0 - total) * (breaks[k + 1] - breaks[k]) /
                                      (s0 - s1)
                    : breaks[k];
      break;
    }
  }
  std::vector<double> next(sessions);
  for (int w = 0; w < sessions; ++w) next[w] = std::clamp(x[w] - tau, lo, hi);
  return Allocation(std::move(next), total);
}

OptimalityResidualA theorem1_residual(std::span<const double> g) {
  OptimalityResidualA r;
  if (g.empty()) return r;
  auto [lo, hi] = std::minmax_element(g.begin(), g.end());
  r.spread = *hi - *lo;
  double sum = 0.0;
  for (double v : g) sum += v;
  r.alpha = sum / static_cast<double>(g.size());
  return r;
}

AllocParameters resolve_parameters(const AllocSolverConfig& config,
                                   const UtilityOracle& oracle,
                                   double total_rate) {
  const int sessions = oracle.session_count();
  AllocParameters p;
  p.delta = config.delta > 0.0 ? config.delta : 0.01 * total_rate;
  if (!(p.delta < total_rate / (2.0 * sessions))) {
    throw InvalidArgument("delta must satisfy 0 < delta < lambda / (2W)");
  }
  p.lipschitz = config.lipschitz > 0.0
                    ? config.lipschitz
                    : check_assumptions(oracle.clone(), 1001).lipschitz_est;
  p.step = config.step_size > 0.0 ? config.step_size
                                  : 0.5 / (p.lipschitz + 1.0);
  if (config.max_iterations < 0) throw InvalidArgument("T must be >= 0");
  return p;
}

double nested_utility(const AugmentedGraph& graph,
                      const std::vector<SessionDag>& dags,
                      std::span<const double> rates,
                      const UtilityOracle& oracle, const LinkCostModel& cost,
                      const RoutingSolverConfig& routing,
                      RoutingResult* solved) {
  const double u = utility_sum(rates, oracle);
  RoutingResult r = omd_rt_solve(graph, dags, rates,
                                 RoutingConfig::uniform(dags), cost, routing);
  const double value = u - r.cost;
  if (solved != nullptr) *solved = std::move(r);
  return value;
}

namespace {

RoutingSolverConfig ProbeConfig(const RoutingSolverConfig& routing) {
  RoutingSolverConfig c = routing;
  c.trace_residual = false;
  return c;
}

}  // namespace

GsOmaState gs_oma_start(const AugmentedGraph& graph,
                        const std::vector<SessionDag>& dags,
                        const UtilityOracle& monitor, const LinkCostModel& cost,
                        const Allocation& allocation,
                        const AllocParameters& params,
                        const AllocSolverConfig& config) {
  GsOmaState state;
  state.allocation = allocation;
  state.step = params.step;
  state.utility =
      nested_utility(graph, dags, allocation.rates(), monitor, cost,
                     ProbeConfig(config.routing), &state.routing);
  return state;
}

GsOmaIterate gs_oma_iterate(const AugmentedGraph& graph,
                            const std::vector<SessionDag>& dags,
                            const UtilityOracle& oracle,
                            const UtilityOracle& monitor,
                            const LinkCostModel& cost,
                            const AllocParameters& params,
                            const AllocSolverConfig& config,
                            GsOmaState& state) {
  const RoutingSolverConfig probe = ProbeConfig(config.routing);
  const UtilityEvaluator evaluator = [&](std::span<const double> rates) {
    return nested_utility(graph, dags, rates, oracle, cost, probe);
  };
  const GradientEstimate est =
      two_point_gradient(state.allocation.rates(), evaluator, params.delta);
  GsOmaIterate out;
  out.grad_spread = theorem1_residual(est.g).spread;

  const double slack = 2.0 * params.lipschitz * params.delta;
  Allocation next;
  RoutingResult routing;
  double utility = 0.0;
  for (int halvings = 0;; ++halvings) {
    next = project_box(mirror_ascent_step(state.allocation, est.g, state.step),
                       params.delta);
    utility = nested_utility(graph, dags, next.rates(), monitor, cost, probe,
                             &routing);
    if (!config.halve_on_violation || utility >= state.utility - slack ||
        halvings >= config.max_halvings) {
      break;
    }
    state.step *= 0.5;
  }
  out.change = next.sup_distance(state.allocation);
  state.allocation = std::move(next);
  state.utility = utility;
  state.routing = std::move(routing);
  return out;
}

AllocResult gs_oma_solve(const AugmentedGraph& graph,
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
  GsOmaState state =
      gs_oma_start(graph, dags, monitor, cost,
                   Allocation::uniform(sessions, total_rate), params, config);

  AllocResult result;
  result.trace.push_back({0, state.utility, 0.0, state.allocation.rates()});
  for (int t = 1; t <= config.max_iterations; ++t) {
    GsOmaIterate it = gs_oma_iterate(graph, dags, oracle, monitor, cost,
                                     params, config, state);
    result.iterations = t;
    result.trace.push_back(
        {t, state.utility, it.grad_spread, state.allocation.rates()});
    if (it.change < config.tolerance) {
      result.converged = true;
      break;
    }
  }
  result.allocation = state.allocation;
  result.routing = std::move(state.routing);
  result.utility = state.utility;
  result.final_step = state.step;
  return result;
}

void write_alloc_trace(const std::vector<AllocTraceRow>& trace,
                       std::ostream& out) {
  out << "iter,U,grad_spread";
  const size_t sessions = trace.empty() ? 0 : trace.front().rates.size();
  for (size_t w = 1; w <= sessions; ++w) out << ",lambda_" << w;
  out << "\n" << std::setprecision(17);
  for (const auto& row : trace) {
    out << row.iter << ',' << row.utility << ',' << row.grad_spread;
    for (double x : row.rates) out << ',' << x;
    out << "\n";
  }
}

}  // namespace cec
