#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include "cec/allocate.h"
#include "cec/errors.h"
#include "fixtures.h"

namespace cec {
namespace {

// Exact Euclidean projection onto {lo <= x <= hi, sum x = total} by
// enumerating every assignment of coordinates to {lower, upper, free}.
std::vector<double> ActiveSetProjection(const std::vector<double>& y, double lo,
                                        double hi, double total) {
  const int n = static_cast<int>(y.size());
  int combos = 1;
  for (int k = 0; k < n; ++k) combos *= 3;
  std::vector<double> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int code = 0; code < combos; ++code) {
    std::vector<int> state(n);
    int c = code, free = 0;
    double fixed = 0.0, free_sum = 0.0;
    for (int k = 0; k < n; ++k, c /= 3) {
      state[k] = c % 3;
      if (state[k] == 0) fixed += lo;
      if (state[k] == 1) fixed += hi;
      if (state[k] == 2) {
        ++free;
        free_sum += y[k];
      }
    }
    std::vector<double> x(n);
    if (free == 0) {
      if (std::abs(fixed - total) > 1e-9) continue;
    }
    const double tau = free ? (total - fixed - free_sum) / free : 0.0;
    bool ok = true;
    for (int k = 0; k < n; ++k) {
      x[k] = state[k] == 0 ? lo : state[k] == 1 ? hi : y[k] + tau;
      if (x[k] < lo - 1e-12 || x[k] > hi + 1e-12) ok = false;
    }
    if (!ok) continue;
    double dist = 0.0;
    for (int k = 0; k < n; ++k) dist += (x[k] - y[k]) * (x[k] - y[k]);
    if (dist < best_dist) {
      best_dist = dist;
      best = x;
    }
  }
  return best;
}

TEST(TwoPointGradient, FormulaExample) {
  const std::vector<double> rates = {1.0};
  const UtilityEvaluator u = [](std::span<const double> x) {
    return x[0] > 1.0 ? 10.2 : 9.8;
  };
  GradientEstimate g = two_point_gradient(rates, u, 0.1);
  EXPECT_NEAR(g.g[0], 2.0, 1e-12);
  EXPECT_EQ(g.u_plus[0], 10.2);
  EXPECT_EQ(g.u_minus[0], 9.8);
}

TEST(TwoPointGradient, ExactForQuadratics) {
  const std::vector<double> rates = {10.0, 20.0, 30.0};
  int calls = 0;
  const UtilityEvaluator u = [&](std::span<const double> x) {
    ++calls;
    double s = 0.0;
    for (double v : x) s -= v * v;
    return s;
  };
  for (double delta : {0.01, 0.5, 3.0}) {
    calls = 0;
    GradientEstimate g = two_point_gradient(rates, u, delta);
    EXPECT_EQ(calls, 6);
    for (int w = 0; w < 3; ++w) EXPECT_NEAR(g.g[w], -2 * rates[w], 1e-9);
  }
}

TEST(TwoPointGradient, ProbeOrderAndErrors) {
  const std::vector<double> rates = {1.0, 2.0};
  std::vector<std::vector<double>> seen;
  const UtilityEvaluator record = [&](std::span<const double> x) {
    seen.emplace_back(x.begin(), x.end());
    return 0.0;
  };
  two_point_gradient(rates, record, 0.5);
  const std::vector<std::vector<double>> want = {
      {1.5, 2.0}, {0.5, 2.0}, {1.0, 2.5}, {1.0, 1.5}};
  EXPECT_EQ(seen, want);

  const UtilityEvaluator fails = [](std::span<const double> x) -> double {
    if (x[1] < 2.0) throw NumericalError("solver broke");
    return 0.0;
  };
  try {
    two_point_gradient(rates, fails, 0.5);
    FAIL() << "expected PerturbationError";
  } catch (const PerturbationError& e) {
    EXPECT_EQ(e.session(), 1);
    EXPECT_EQ(e.sign(), -1);
  }
  EXPECT_THROW(two_point_gradient(rates, record, 1.5), PerturbationError);
  EXPECT_THROW(two_point_gradient(rates, record, 0.0), InvalidArgument);
}

// Symmetric diamond, one session, log utility: U(x) = log(x + 1) - D*(x),
// D*(x) = 4 exp(x / 20), so dU/dx = 1 / (x + 1) - 0.2 exp(x / 20).
TEST(TwoPointGradient, MatchesAnalyticDerivativeThroughRouting) {
  testing::Net net = testing::Diamond();
  UtilityOracle oracle({UtilityKind::kLogarithmic, {1.0}, {1.0}}, 4.0);
  RoutingSolverConfig routing;
  routing.tolerance = 1e-12;
  routing.trace_residual = false;
  const LinkCostModel cost = LinkCostModel::exp_ratio(1.0);
  const UtilityEvaluator u = [&](std::span<const double> x) {
    return nested_utility(net.graph, net.dags, x, oracle, cost, routing);
  };
  const std::vector<double> rates = {2.0};
  const double delta = 0.01;
  GradientEstimate g = two_point_gradient(rates, u, delta);
  const double analytic = 1.0 / 3.0 - 0.2 * std::exp(0.1);
  // Third derivatives are O(1); the O(delta^2) term is ~1e-4 * |u'''| / 6.
  EXPECT_NEAR(g.g[0], analytic, 1e-4);
  EXPECT_EQ(oracle.query_count(), 2u);
}

TEST(MirrorAscentStep, Examples) {
  Allocation a({30.0, 30.0}, 60.0);
  const std::vector<double> g = {std::log(3.0), 0.0};
  Allocation b = mirror_ascent_step(a, g, 1.0);
  EXPECT_NEAR(b[0], 45.0, 1e-12);
  EXPECT_NEAR(b[1], 15.0, 1e-12);

  Allocation c({10.0, 20.0, 30.0}, 60.0);
  const std::vector<double> same = {0.7, 0.7, 0.7};
  Allocation d = mirror_ascent_step(c, same, 3.0);
  for (int w = 0; w < 3; ++w) EXPECT_NEAR(d[w], c[w], 1e-12);
  const std::vector<double> any = {5.0, -2.0, 1.0};
  Allocation e = mirror_ascent_step(c, any, 0.0);
  for (int w = 0; w < 3; ++w) EXPECT_NEAR(e[w], c[w], 1e-12);
}

TEST(MirrorAscentStep, ShiftedExponentsAvoidOverflow) {
  Allocation a({10.0, 20.0, 30.0}, 60.0);
  const std::vector<double> big = {1000.0, 1000.0 + std::log(2.0), 1000.0};
  const std::vector<double> small = {0.0, std::log(2.0), 0.0};
  Allocation x = mirror_ascent_step(a, big, 1.0);
  Allocation y = mirror_ascent_step(a, small, 1.0);
  double sum = 0.0;
  for (int w = 0; w < 3; ++w) {
    EXPECT_NEAR(x[w], y[w], 1e-12);
    EXPECT_TRUE(std::isfinite(x[w]));
    sum += x[w];
  }
  EXPECT_NEAR(sum, 60.0, 1e-12);
}

TEST(MirrorAscentStep, RejectsZeroEntries) {
  Allocation a({0.0, 60.0}, 60.0);
  const std::vector<double> g = {1.0, 0.0};
  EXPECT_THROW(mirror_ascent_step(a, g, 1.0), InvalidArgument);
}

TEST(ProjectBox, Examples) {
  Allocation interior({20.0, 25.0, 15.0}, 60.0);
  Allocation p = project_box(interior, 1.0);
  for (int w = 0; w < 3; ++w) EXPECT_EQ(p[w], interior[w]);

  Allocation two = project_box(Allocation({59.5, 0.5}, 60.0), 1.0);
  EXPECT_NEAR(two[0], 59.0, 1e-12);
  EXPECT_NEAR(two[1], 1.0, 1e-12);

  Allocation three = project_box(Allocation({58.0, 1.5, 0.5}, 60.0), 1.0);
  const std::vector<double> want = ActiveSetProjection({58.0, 1.5, 0.5}, 1.0, 59.0, 60.0);
  double sum = 0.0;
  for (int w = 0; w < 3; ++w) {
    EXPECT_NEAR(three[w], want[w], 1e-12);
    EXPECT_GE(three[w], 1.0);
    EXPECT_LE(three[w], 59.0);
    sum += three[w];
  }
  EXPECT_NEAR(sum, 60.0, 1e-12);
  EXPECT_GE(three[0], three[1]);
  EXPECT_GE(three[1], three[2]);
}

TEST(ProjectBox, InfeasibleBox) {
  EXPECT_THROW(project_box(Allocation({1.0, 1.0, 1.0}, 3.0), 1.5), InvalidArgument);
}

TEST(ProjectBox, AgreesWithActiveSetOracle) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int failures = 0;
  for (int k = 0; k < 2000; ++k) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const double total = 60.0;
    const double delta = unit(rng) * total / (2.0 * n);
    std::vector<double> y(n);
    double s = 0.0;
    for (double& v : y) s += (v = std::pow(unit(rng), 4.0));
    for (double& v : y) v *= total / s;
    Allocation got = project_box(Allocation(y, total), delta);
    const std::vector<double> want = ActiveSetProjection(y, delta, total - delta, total);
    for (int w = 0; w < n; ++w) {
      if (std::abs(got[w] - want[w]) > 1e-9) ++failures;
      for (int v = 0; v < n; ++v) {
        if (y[w] > y[v] && got[w] < got[v] - 1e-12) ++failures;
      }
    }
  }
  EXPECT_EQ(failures, 0);
}

TEST(Theorem1Residual, Examples) {
  OptimalityResidualA a = theorem1_residual(std::vector<double>{2.0, 2.0, 2.0});
  EXPECT_EQ(a.spread, 0.0);
  EXPECT_EQ(a.alpha, 2.0);
  OptimalityResidualA b = theorem1_residual(std::vector<double>{1.0, 3.0});
  EXPECT_EQ(b.spread, 2.0);
  EXPECT_EQ(b.alpha, 2.0);
}

TEST(ResolveParameters, DefaultsAndValidation) {
  UtilityOracle oracle = testing::LogOracle();
  AllocSolverConfig config;
  AllocParameters p = resolve_parameters(config, oracle, 60.0);
  EXPECT_DOUBLE_EQ(p.delta, 0.6);
  EXPECT_EQ(oracle.query_count(), 0u);
  const double lipschitz = check_assumptions(oracle, 1001).lipschitz_est;
  EXPECT_DOUBLE_EQ(p.lipschitz, lipschitz);
  EXPECT_DOUBLE_EQ(p.step, 0.5 / (lipschitz + 1.0));
  config.delta = 10.0;
  EXPECT_THROW(resolve_parameters(config, oracle, 60.0), InvalidArgument);
}

TEST(GsOma, SymmetricInstanceSplitsEvenly) {
  testing::Net net = testing::TwinSessions();
  UtilityOracle oracle({UtilityKind::kLogarithmic, {10.0, 10.0}, {0.1, 0.1}}, 20.0);
  const UtilityOracle monitor = oracle.clone();
  AllocSolverConfig config = testing::StandardAllocConfig();
  const LinkCostModel cost = LinkCostModel::exp_ratio(1.0);
  const AllocParameters params = resolve_parameters(config, oracle, 20.0);
  GsOmaState state = gs_oma_start(net.graph, net.dags, monitor, cost,
                                  Allocation({14.0, 6.0}, 20.0), params, config);
  bool converged = false;
  for (int t = 0; t < 200 && !converged; ++t) {
    converged = gs_oma_iterate(net.graph, net.dags, oracle, monitor, cost, params,
                               config, state).change < 1e-6;
  }
  ASSERT_TRUE(converged);
  EXPECT_NEAR(state.allocation[0], 10.0, 1e-4);
  EXPECT_NEAR(state.allocation[1], 10.0, 1e-4);

  AllocResult uniform = gs_oma_solve(net.graph, net.dags, oracle, cost, 20.0, config);
  EXPECT_TRUE(uniform.converged);
  EXPECT_NEAR(uniform.allocation[0], 10.0, 1e-9);
  const auto est = two_point_gradient(
      uniform.allocation.rates(),
      [&](std::span<const double> x) {
        return nested_utility(net.graph, net.dags, x, monitor, cost, config.routing);
      },
      params.delta / 10);
  EXPECT_LT(theorem1_residual(est.g).spread, 1e-3);
}

class GsOmaStandard : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    instance_ = new Instance(testing::StandardInstance(1));
    oracle_ = new UtilityOracle(testing::LogOracle());
    result_ = new AllocResult(gs_oma_solve(instance_->graph, instance_->dags, *oracle_,
                                           instance_->cost, 60.0,
                                           testing::StandardAllocConfig()));
  }
  static void TearDownTestSuite() {
    delete result_;
    delete oracle_;
    delete instance_;
  }
  static Instance* instance_;
  static UtilityOracle* oracle_;
  static AllocResult* result_;
};

Instance* GsOmaStandard::instance_ = nullptr;
UtilityOracle* GsOmaStandard::oracle_ = nullptr;
AllocResult* GsOmaStandard::result_ = nullptr;

TEST_F(GsOmaStandard, ConvergesWithinBudget) {
  EXPECT_TRUE(result_->converged);
  EXPECT_LE(result_->iterations, 200);
  EXPECT_EQ(result_->trace.size(), static_cast<size_t>(result_->iterations) + 1);
}

TEST_F(GsOmaStandard, QueriesExactlyTwoWPerIteration) {
  EXPECT_EQ(oracle_->query_count(),
            static_cast<std::uint64_t>(2 * 3 * result_->iterations));
}

TEST_F(GsOmaStandard, IteratesStayInBox) {
  const double delta = 0.6;
  for (const AllocTraceRow& row : result_->trace) {
    double sum = 0.0;
    for (double x : row.rates) {
      EXPECT_GE(x, delta - 1e-12);
      EXPECT_LE(x, 60.0 - delta + 1e-12);
      sum += x;
    }
    EXPECT_NEAR(sum, 60.0, 1e-9);
  }
}

TEST_F(GsOmaStandard, ApproximateAscent) {
  const AllocParameters p =
      resolve_parameters(testing::StandardAllocConfig(), *oracle_, 60.0);
  for (size_t t = 1; t < result_->trace.size(); ++t) {
    EXPECT_GE(result_->trace[t].utility,
              result_->trace[t - 1].utility - 2 * p.lipschitz * p.delta)
        << "iteration " << t;
  }
}

TEST_F(GsOmaStandard, Theorem1ResidualAtOptimum) {
  const AllocSolverConfig config = testing::StandardAllocConfig();
  const UtilityOracle probe = oracle_->clone();
  const auto est = two_point_gradient(
      result_->allocation.rates(),
      [&](std::span<const double> x) {
        return nested_utility(instance_->graph, instance_->dags, x, probe,
                              instance_->cost, config.routing);
      },
      0.06);
  const OptimalityResidualA r = theorem1_residual(est.g);
  EXPECT_LT(r.spread, 1e-2 * (1.0 + std::abs(r.alpha)));
}

TEST_F(GsOmaStandard, TraceCsvLayout) {
  std::ostringstream out;
  write_alloc_trace(result_->trace, out);
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "iter,U,grad_spread,lambda_1,lambda_2,lambda_3");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'),
            static_cast<long>(result_->trace.size()) + 1);
}

}  // namespace
}  // namespace cec
