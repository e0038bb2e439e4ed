#include "runner.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "cec/joint.h"
#include "svg.h"

namespace cec::tools {

int worker_count(int requested, int cells) {
  int n = requested;
  if (n <= 0) {
    if (const char* env = std::getenv("CEC_THREADS")) n = std::atoi(env);
  }
  if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
  return std::clamp(n, 1, std::max(1, cells));
}

namespace {

struct Cell {
  int nodes = 0;
  std::uint64_t seed = 0;
  std::string algo;  // an algorithm name or "switch"
};

struct CellOutput {
  std::vector<CellResult> results;  // "switch" yields one row per algorithm
  std::map<std::string, std::string> files;
  std::vector<std::pair<int, double>> routing_series;  // (iter, D)
  std::vector<JointTraceRow> joint_rows;
};

std::string Prefix(const ExperimentConfig& c, const Cell& cell) {
  std::string p = c.network_sizes.empty() ? "" : "n" + std::to_string(cell.nodes) + "_";
  return p + "s" + std::to_string(cell.seed);
}

std::vector<double> UniformRates(const ExperimentConfig& c) {
  return std::vector<double>(c.sessions, c.total_rate / c.sessions);
}

double UStar(const ExperimentConfig& c, const Instance& in,
             const UtilityOracle& oracle) {
  AllocSolverConfig longer = alloc_config(c);
  longer.max_iterations = 4 * std::max(1, c.alloc_iterations);
  longer.tolerance = c.alloc_tolerance / 10.0;
  return gs_oma_solve(in.graph, in.dags, oracle, in.cost, c.total_rate, longer)
      .utility;
}

CellOutput RunCell(const ExperimentConfig& c, const Cell& cell) {
  CellOutput out;
  const InstanceSpec spec = instance_spec(c, cell.nodes);
  const Instance in = build_instance(spec, cell.seed);
  const std::string prefix = Prefix(c, cell);
  CellResult base;
  base.nodes = cell.nodes;
  base.seed = cell.seed;
  base.algo = cell.algo;
  base.ok = true;

  if (cell.algo == "omd_rt" || cell.algo == "pgd") {
    RoutingSolverConfig rc = routing_config(c);
    if (cell.algo == "pgd") rc.step_size = c.pgd_step;
    const std::vector<double> rates = UniformRates(c);
    RoutingResult r =
        cell.algo == "omd_rt"
            ? omd_rt_solve(in.graph, in.dags, rates,
                           RoutingConfig::uniform(in.dags), in.cost, rc)
            : pgd_routing_baseline(in.graph, in.dags, rates,
                                   RoutingConfig::uniform(in.dags), in.cost, rc);
    std::ostringstream trace;
    write_routing_trace(r.trace, trace);
    out.files[prefix + "_" + cell.algo + ".csv"] = trace.str();
    std::ostringstream flows;
    write_flow_csv(r.flows, in.graph, flows);
    out.files[prefix + "_" + cell.algo + "_flows.csv"] = flows.str();
    for (const auto& row : r.trace) out.routing_series.emplace_back(row.iter, row.cost);
    base.final_value = r.cost;
    base.iters = r.iterations;
  } else if (cell.algo == "opt") {
    const std::vector<double> rates = UniformRates(c);
    OptResult r = opt_baseline(in.graph, in.dags, rates, in.cost);
    std::ostringstream file;
    file << "iter,D,gap\n" << std::setprecision(17) << r.iterations << ','
         << r.cost << ',' << r.gap << "\n";
    out.files[prefix + "_opt.csv"] = file.str();
    out.routing_series.emplace_back(0, r.cost);
    base.final_value = r.cost;
    base.iters = r.iterations;
  } else if (cell.algo == "gs_oma" || cell.algo == "omad") {
    const UtilityOracle oracle = make_oracle(c);
    const AllocSolverConfig ac = alloc_config(c);
    std::vector<JointTraceRow> rows;
    if (cell.algo == "gs_oma") {
      AllocResult r =
          gs_oma_solve(in.graph, in.dags, oracle, in.cost, c.total_rate, ac);
      std::ostringstream file;
      write_alloc_trace(r.trace, file);
      out.files[prefix + "_gs_oma.csv"] = file.str();
      rows = to_joint_trace(r.trace);
      base.final_value = r.utility;
      base.iters = r.iterations;
    } else {
      JointResult r =
          omad_solve(in.graph, in.dags, oracle, in.cost, c.total_rate, ac);
      rows = std::move(r.trace);
      base.final_value = r.utility;
      base.iters = r.iterations;
    }
    if (c.lyapunov) {
      const UtilityOracle monitor = oracle.clone();
      lyapunov_trace(rows, UStar(c, in, monitor), in.graph, in.dags, monitor,
                     in.cost, ac.routing);
    }
    std::ostringstream joint;
    write_joint_trace(rows, joint);
    out.files[prefix + "_" + cell.algo + "_joint.csv"] = joint.str();
    out.joint_rows = std::move(rows);
  } else if (cell.algo == "switch") {
    const UtilityOracle oracle = make_oracle(c);
    const Instance after = build_instance(spec, cell.seed + c.switch_seed_offset);
    SwitchExperiment ex = topology_change_experiment(
        in, after, oracle, c.switch_iteration, alloc_config(c));
    std::vector<JointTraceRow> rows = ex.nested.trace;
    rows.insert(rows.end(), ex.single.trace.begin(), ex.single.trace.end());
    std::ostringstream file;
    write_joint_trace(rows, file);
    out.files[prefix + "_switch.csv"] = file.str();
    for (const SwitchRun* run : {&ex.nested, &ex.single}) {
      CellResult r = base;
      r.algo = "switch_" + run->algo;
      r.final_value = run->utility;
      r.iters = run->trace.back().iter;
      r.ok = true;
      out.results.push_back(r);
    }
    return out;
  }
  out.results.push_back(base);
  return out;
}

std::string SummaryAlgo(const ExperimentConfig& c, const CellResult& r) {
  return c.network_sizes.empty() ? r.algo
                                 : r.algo + "@n" + std::to_string(r.nodes);
}

void WriteFile(const std::filesystem::path& dir, const std::string& name,
               const std::string& content) {
  std::ofstream f(dir / name, std::ios::binary);
  if (!f) throw Error("cannot write " + (dir / name).string());
  f << content;
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& config,
                         const RunOptions& options, std::ostream& log) {
  validate_config(config);
  const std::vector<int> sizes = config.network_sizes.empty()
                                     ? std::vector<int>{config.er_nodes}
                                     : config.network_sizes;
  std::vector<Cell> cells;
  for (int n : sizes) {
    for (std::uint64_t seed : config.seeds) {
      for (const std::string& algo : known_algorithms()) {
        if (std::find(config.algorithms.begin(), config.algorithms.end(), algo) !=
            config.algorithms.end()) {
          cells.push_back({n, seed, algo});
        }
      }
      if (config.switch_iteration > 0) cells.push_back({n, seed, "switch"});
    }
  }

  std::vector<CellOutput> outputs(cells.size());
  std::atomic<size_t> next{0};
  std::mutex log_mutex;
  auto work = [&] {
    for (size_t i = next++; i < cells.size(); i = next++) {
      const Cell& cell = cells[i];
      const auto start = std::chrono::steady_clock::now();
      try {
        outputs[i] = RunCell(config, cell);
      } catch (const std::exception& e) {
        CellResult failed;
        failed.nodes = cell.nodes;
        failed.seed = cell.seed;
        failed.algo = cell.algo;
        failed.error = e.what();
        outputs[i] = CellOutput{};
        outputs[i].results.push_back(failed);
        std::lock_guard<std::mutex> lock(log_mutex);
        log << "cell seed=" << cell.seed << " algo=" << cell.algo
            << " n=" << cell.nodes << " failed: " << e.what() << "\n";
      }
      const double ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count();
      for (auto& r : outputs[i].results) r.wall_ms = ms;
    }
  };
  const int workers = worker_count(options.threads, static_cast<int>(cells.size()));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  const std::filesystem::path dir =
      options.out_dir.empty() ? config.output : options.out_dir;
  std::filesystem::create_directories(dir);
  RunReport report;
  auto emit = [&](const std::string& name, const std::string& content) {
    WriteFile(dir, name, content);
    report.files.push_back(name);
    if (options.svg) {
      const std::string svg_name = name.substr(0, name.size() - 4) + ".svg";
      WriteFile(dir, svg_name, emit_svg(content));
      report.files.push_back(svg_name);
    }
  };

  // Per-cell files, then combined per-instance charts, in cell order.
  std::map<std::string, std::vector<size_t>> by_instance;
  for (size_t i = 0; i < cells.size(); ++i) {
    for (const auto& [name, content] : outputs[i].files) {
      WriteFile(dir, name, content);
      report.files.push_back(name);
      if (options.svg && name.ends_with("_switch.csv")) {
        const std::string svg_name = name.substr(0, name.size() - 4) + ".svg";
        WriteFile(dir, svg_name, emit_svg(content));
        report.files.push_back(svg_name);
      }
    }
    by_instance[Prefix(config, cells[i])].push_back(i);
  }
  for (const auto& [prefix, members] : by_instance) {
    std::ostringstream routing;
    std::vector<JointTraceRow> joint;
    int last_iter = 0;
    bool any_routing = false;
    for (size_t i : members) {
      for (const auto& [iter, d] : outputs[i].routing_series) {
        last_iter = std::max(last_iter, iter);
        any_routing = true;
      }
    }
    routing << "iter,algo,D\n" << std::setprecision(17);
    for (size_t i : members) {
      const auto& series = outputs[i].routing_series;
      if (series.empty()) continue;
      if (cells[i].algo == "opt") {
        // Reference level across the whole iteration range.
        routing << 0 << ",opt," << series[0].second << "\n";
        if (last_iter > 0) routing << last_iter << ",opt," << series[0].second << "\n";
      } else {
        for (const auto& [iter, d] : series) {
          routing << iter << ',' << cells[i].algo << ',' << d << "\n";
        }
      }
    }
    for (size_t i : members) {
      joint.insert(joint.end(), outputs[i].joint_rows.begin(),
                   outputs[i].joint_rows.end());
    }
    if (any_routing) emit(prefix + "_routing.csv", routing.str());
    if (!joint.empty()) {
      std::ostringstream file;
      write_joint_trace(joint, file);
      emit(prefix + "_joint.csv", file.str());
    }
  }

  std::ostringstream summary;
  summary << "seed,algo,final_value,iters,wall_ms\n" << std::setprecision(17);
  std::map<std::pair<int, std::string>, std::pair<double, int>> sweep;
  for (size_t i = 0; i < cells.size(); ++i) {
    for (const CellResult& r : outputs[i].results) {
      report.cells.push_back(r);
      report.ok = report.ok && r.ok;
      summary << r.seed << ',' << SummaryAlgo(config, r) << ',';
      if (r.ok) {
        summary << r.final_value << ',' << r.iters << ',';
        auto& acc = sweep[{r.nodes, r.algo}];
        acc.first += r.final_value;
        acc.second += 1;
      } else {
        summary << "error,-,";
      }
      if (options.timing) {
        summary << std::fixed << std::setprecision(3) << r.wall_ms
                << std::defaultfloat << std::setprecision(17);
      } else {
        summary << '-';
      }
      summary << "\n";
    }
  }
  WriteFile(dir, "summary.csv", summary.str());
  report.files.push_back("summary.csv");
  if (!config.network_sizes.empty()) {
    std::ostringstream table;
    table << "n,algo,mean_final_value\n" << std::setprecision(17);
    for (const auto& [key, acc] : sweep) {
      table << key.first << ',' << key.second << ',' << acc.first / acc.second
            << "\n";
    }
    WriteFile(dir, "sweep.csv", table.str());
    report.files.push_back("sweep.csv");
  }
  std::ostringstream saved;
  write_config(config, saved);
  WriteFile(dir, "config.cfg", saved.str());
  report.files.push_back("config.cfg");
  return report;
}

std::vector<VerifyCheck> verify_experiment(const ExperimentConfig& config) {
  validate_config(config);
  std::vector<VerifyCheck> checks;
  auto add = [&checks](std::string name, bool pass, std::string detail) {
    checks.push_back({std::move(name), pass, std::move(detail)});
  };
  auto fmt = [](double v) {
    std::ostringstream s;
    s << std::setprecision(3) << v;
    return s.str();
  };

  const UtilityOracle oracle = make_oracle(config);
  {
    AssumptionReport a = check_assumptions(oracle.clone(), 201);
    add("utility_monotone", a.monotone, "L_est=" + fmt(a.lipschitz_est));
    const UtilityOracle probe = oracle.clone();
    double worst = -std::numeric_limits<double>::infinity();
    const double h = config.total_rate / 200.0;
    for (int w = 0; w < probe.session_count(); ++w) {
      for (int k = 1; k < 200; ++k) {
        double d2 = probe.evaluate(w, (k + 1) * h) - 2 * probe.evaluate(w, k * h) +
                    probe.evaluate(w, (k - 1) * h);
        worst = std::max(worst, d2);
      }
    }
    add("utility_concave", worst <= 1e-10, "max second difference " + fmt(worst));
  }

  const std::vector<int> sizes = config.network_sizes.empty()
                                     ? std::vector<int>{config.er_nodes}
                                     : config.network_sizes;
  for (int n : sizes) {
    for (std::uint64_t seed : config.seeds) {
      const std::string tag =
          "[n=" + std::to_string(n) + " seed=" + std::to_string(seed) + "] ";
      Instance in;
      try {
        in = build_instance(instance_spec(config, n), seed);
      } catch (const std::exception& e) {
        add(tag + "instance", false, e.what());
        continue;
      }
      const std::vector<double> rates = UniformRates(config);
      RoutingSolverConfig rc = routing_config(config);
      RoutingResult r = omd_rt_solve(in.graph, in.dags, rates,
                                     RoutingConfig::uniform(in.dags), in.cost, rc);

      ConservationReport cons = check_conservation(r.flows, in.graph, rates);
      add(tag + "conservation", cons.max_residual <= 1e-9 * (1 + config.total_rate),
          "max residual " + fmt(cons.max_residual));

      double worst_rise = 0.0;
      for (size_t k = 1; k < r.trace.size(); ++k) {
        worst_rise = std::max(worst_rise, r.trace[k].cost - r.trace[k - 1].cost -
                                              1e-10 * (1 + std::abs(r.trace[k - 1].cost)));
      }
      add(tag + "monotone_descent", worst_rise <= 0.0,
          "worst rise beyond slack " + fmt(worst_rise));

      // Broadcast marginals against central differences of D along
      // feasible directions phi + h (e_j - e_k). Draws where round-off in D
      // (about eps * D / h) exceeds the tolerance cannot resolve the
      // gradient and are skipped.
      std::mt19937_64 rng(seed * 7 + 11);
      double worst_fd = 0.0;
      int unresolvable = 0;
      for (int trial = 0; trial < 10; ++trial) {
        RoutingConfig phi = RoutingConfig::random(in.dags, rng());
        FlowState flows = propagate(in.graph, in.dags, rates, phi);
        MarginalCosts m = broadcast_marginals(in.graph, in.dags, flows, phi, in.cost);
        std::uniform_int_distribution<int> pick_w(0, config.sessions - 1);
        const int w = pick_w(rng);
        std::vector<NodeId> rows;
        for (NodeId i : in.dags[w].order) {
          if (in.dags[w].out_links[i].size() >= 2 && flows.throughput[w][i] > 0) {
            rows.push_back(i);
          }
        }
        if (rows.empty()) continue;
        const NodeId i = rows[std::uniform_int_distribution<size_t>(0, rows.size() - 1)(rng)];
        const size_t j = 0, k = 1;
        const double eps = 1e-5 * std::min(phi.phi[w][i][k], 1.0 - phi.phi[w][i][j]);
        const double analytic =
            flows.throughput[w][i] * (m.link[w][i][j] - m.link[w][i][k]);
        const double scale = flows.throughput[w][i] *
                             (std::abs(m.link[w][i][j]) + std::abs(m.link[w][i][k]));
        const double noise = 4 * std::numeric_limits<double>::epsilon() *
                             total_cost(in.graph, flows, in.cost) / eps;
        if (!(noise <= 1e-6 * scale)) {
          ++unresolvable;
          continue;
        }
        auto cost_at = [&](double e) {
          RoutingConfig p = phi;
          p.phi[w][i][j] += e;
          p.phi[w][i][k] -= e;
          return total_cost(in.graph, propagate(in.graph, in.dags, rates, p), in.cost);
        };
        const double fd = (cost_at(eps) - cost_at(-eps)) / (2 * eps);
        worst_fd = std::max(worst_fd, std::abs(fd - analytic) / scale);
      }
      add(tag + "broadcast_vs_fd", worst_fd <= 1e-5,
          "max rel error " + fmt(worst_fd) + ", " + std::to_string(unresolvable) +
              " of 10 draws unresolvable");

      OptResult opt = opt_baseline(in.graph, in.dags, rates, in.cost);
      add(tag + "opt_lower_bound", opt.cost <= r.cost + 1e-6,
          "D*=" + fmt(opt.cost) + " D_omd=" + fmt(r.cost));

      // The KKT check needs a converged solve whatever the run budget is.
      RoutingSolverConfig exact = rc;
      exact.max_iterations = std::max(rc.max_iterations, 100000);
      exact.tolerance = rc.tolerance > 0.0 ? std::min(rc.tolerance, 1e-10) : 1e-10;
      exact.trace_residual = false;
      RoutingResult solved = omd_rt_solve(in.graph, in.dags, rates, r.routing, in.cost, exact);
      MarginalCosts m =
          broadcast_marginals(in.graph, in.dags, solved.flows, solved.routing, in.cost);
      OptimalityResidualR kkt =
          theorem3_residual(in.graph, in.dags, solved.flows, m, solved.routing);
      const bool kkt_ok =
          solved.converged && kkt.max_spread < 1e-4 * (1 + kkt.mean_marginal);
      add(tag + "kkt_residual", kkt_ok,
          std::string(solved.converged ? "" : "not converged; ") + "spread " +
              fmt(kkt.max_spread));

      double worst_aff = 0.0;
      for (int trial = 0; trial < 10; ++trial) {
        RoutingConfig phi = RoutingConfig::random(in.dags, rng());
        std::uniform_real_distribution<double> u(0.0, config.total_rate);
        std::vector<double> r1(config.sessions), r2(config.sessions), mix(config.sessions);
        const double alpha = u(rng) / config.total_rate;
        const double beta = u(rng) / config.total_rate;
        for (int w = 0; w < config.sessions; ++w) {
          r1[w] = u(rng);
          r2[w] = u(rng);
          mix[w] = alpha * r1[w] + beta * r2[w];
        }
        FlowState f1 = propagate(in.graph, in.dags, r1, phi);
        FlowState f2 = propagate(in.graph, in.dags, r2, phi);
        FlowState fm = propagate(in.graph, in.dags, mix, phi);
        for (LinkId l = 0; l < in.graph.link_count(); ++l) {
          const double expect = alpha * f1.link_flow[l] + beta * f2.link_flow[l];
          worst_aff = std::max(worst_aff, std::abs(fm.link_flow[l] - expect) /
                                              (1 + std::abs(expect)));
        }
      }
      add(tag + "flow_linearity", worst_aff <= 1e-9, "max error " + fmt(worst_aff));
    }
  }
  return checks;
}

}  // namespace cec::tools
