#include "permon/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "permon/cycle_analysis.hpp"
#include "permon/cycle_builder.hpp"
#include "permon/des.hpp"
#include "permon/tcp_codegen.hpp"

namespace permon {
namespace {

const char* mode_name(RunMode mode) {
  switch (mode) {
    case RunMode::kSimulate: return "simulate";
    case RunMode::kGreedyInit: return "greedy-init";
    case RunMode::kFullPipeline: return "full-pipeline";
    case RunMode::kRandomBaseline: return "random-init-baseline";
  }
  return "?";
}

class StageClock {
 public:
  explicit StageClock(RunReport* report) : report_(report) {}

  template <typename F>
  auto run(const std::string& name, F&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        record(name, t0);
      } else {
        auto out = fn();
        record(name, t0);
        return out;
      }
    } catch (const PipelineError&) {
      throw;
    } catch (const std::exception& e) {
      throw PipelineError(name, e.what());
    }
  }

 private:
  void record(const std::string& name,
              std::chrono::steady_clock::time_point t0) {
    const auto dt = std::chrono::steady_clock::now() - t0;
    report_->stage_ms[name] =
        std::chrono::duration<double, std::milli>(dt).count();
  }

  RunReport* report_;
};

Partition single_cluster_partition(const ProblemInstance& instance,
                                   const TargetCycle& tour) {
  Partition partition;
  std::vector<int> all(instance.num_targets());
  std::iota(all.begin(), all.end(), 0);
  partition.clusters.push_back(all);
  partition.cycles.push_back(tour);
  std::vector<int> neglected;
  for (int t : all) {
    if (!tour.contains(t)) neglected.push_back(t);
  }
  double cost = cycle_cost_or_inf(instance, tour);
  for (int t : neglected) {
    cost += neglected_target_cost(instance.target(t), instance.horizon());
  }
  partition.neglected.push_back(std::move(neglected));
  partition.costs.push_back(cost);
  partition.total_cost = cost;
  return partition;
}

TargetCycle plan_single_tour(const ProblemInstance& instance,
                             bool refine_tours) {
  // Dense enough graphs let the plain edge-split greedy cover everything;
  // otherwise (or when it strands targets) fall back to the constrained
  // builder, which may revisit targets.
  const ValidationReport topo = validate_topology(instance);
  TargetCycle tour({0});
  bool have_tour = false;
  if (topo.bi_triangular) {
    const GreedyResult greedy = greedy_unconstrained(instance, nullptr);
    if (!greedy.halted) {
      tour = greedy.cycle;
      have_tour = true;
    }
  }
  if (!have_tour) {
    tour = greedy_constrained(instance, nullptr).cycle;
  }
  if (refine_tours) tour = refine(instance, tour, nullptr);
  return tour;
}

struct PlanResult {
  Partition partition;
  Assignment assignment;
  ThresholdPolicy policy;
  double sigma_used = 0.0;
};

PlanResult plan(const ProblemInstance& instance, const RunConfig& config,
                StageClock* clock) {
  PlanResult out;
  const int n = instance.num_agents();

  if (n == 1) {
    const TargetCycle tour = clock->run("tour", [&] {
      return plan_single_tour(instance, config.refine_tours);
    });
    out.partition = single_cluster_partition(instance, tour);
  } else {
    const Eigen::MatrixXd disparity =
        clock->run("disparities", [&] { return disparity_matrix(instance); });
    out.sigma_used = config.sigma.value_or(median_sigma(disparity));
    const std::vector<int> labels = clock->run("clustering", [&] {
      const Eigen::MatrixXd similarity =
          similarity_matrix(disparity, out.sigma_used);
      return spectral_clusters(build_laplacians(similarity), n, config.seed);
    });
    std::vector<std::vector<int>> clusters(n);
    for (std::size_t t = 0; t < labels.size(); ++t) {
      clusters[labels[t]].push_back(static_cast<int>(t));
    }
    out.partition = clock->run("balancing", [&] {
      return balance_partition(instance, build_partition(instance, clusters),
                               nullptr);
    });
  }

  out.assignment = clock->run("assignment", [&] {
    return assign_agents(instance, out.partition.cycles,
                         instance.start_targets());
  });

  clock->run("thresholds", [&] {
    // One barrier for the whole fleet, sized to the slowest tour: a target
    // neglected by every tour keeps growing without bound, so any smaller
    // wall would eventually be breached and hijack a passing agent.
    std::vector<CycleSteadyState> steadies;
    steadies.reserve(out.partition.cycles.size());
    double max_tour_time = 0.0;
    for (const TargetCycle& cycle : out.partition.cycles) {
      steadies.push_back(analyze_cycle(instance, cycle));
      const double t = steadies.back().feasible ? steadies.back().tour_time
                                                : cycle.rho_total(instance);
      max_tour_time = std::max(max_tour_time, t);
    }
    const double barrier =
        recommended_barrier(instance, std::max(max_tour_time, 1.0));

    out.policy.agents.resize(n);
    for (int a = 0; a < n; ++a) {
      const int c = out.assignment.cycle_of_agent[a];
      const TargetCycle& cycle = out.partition.cycles[c];
      const CycleSteadyState& steady = steadies[c];
      ThresholdMatrix matrix;
      if (cycle.is_unconstrained() || !steady.feasible) {
        matrix = policy_from_cycle(instance, cycle, barrier);
      } else {
        BranchThresholdConfig branch_config;
        branch_config.barrier = barrier;
        matrix =
            constrained_cycle_thresholds(instance, cycle, steady, branch_config)
                .matrix;
      }
      // Chase prefix from the agent's start, cut at first tour contact.
      std::vector<int> prefix;
      for (int t : out.assignment.approach_paths[a]) {
        prefix.push_back(t);
        if (cycle.contains(t)) break;
      }
      prepend_path_policy(instance, &matrix, prefix, cycle, barrier);
      out.policy.agents[a] = std::move(matrix);
    }
  });
  return out;
}

}  // namespace

RunMode parse_run_mode(const std::string& name) {
  if (name == "simulate") return RunMode::kSimulate;
  if (name == "greedy-init") return RunMode::kGreedyInit;
  if (name == "full-pipeline") return RunMode::kFullPipeline;
  if (name == "random-init-baseline") return RunMode::kRandomBaseline;
  throw std::invalid_argument(
      "unknown mode '" + name +
      "' (expected simulate | greedy-init | full-pipeline | "
      "random-init-baseline)");
}

RunReport run_pipeline(const ProblemInstance& instance,
                       const RunConfig& config) {
  RunReport report;
  report.mode = mode_name(config.mode);
  report.seed = config.seed;
  report.num_targets = instance.num_targets();
  report.num_agents = instance.num_agents();
  StageClock clock(&report);

  switch (config.mode) {
    case RunMode::kSimulate: {
      ThresholdPolicy policy;
      try {
        policy = config.policy_path.has_value()
                     ? load_policy_json(*config.policy_path)
                     : random_policy(instance, 10.0, config.seed);
        validate_policy(instance, policy);
      } catch (const std::exception& e) {
        throw PipelineError("input", e.what());
      }
      report.initial_policy = policy;
      report.final_policy = policy;
      const double cost = clock.run(
          "simulate", [&] { return simulate(instance, policy).cost; });
      report.initial_cost = cost;
      report.final_cost = cost;
      report.cost_trace = {cost};
      return report;
    }
    case RunMode::kRandomBaseline: {
      report.initial_policy = random_policy(instance, 10.0, config.seed);
      report.initial_cost = clock.run("evaluate", [&] {
        return simulate(instance, report.initial_policy).cost;
      });
      const DescentResult descent = clock.run("descent", [&] {
        return gradient_descent(instance, report.initial_policy,
                                config.descent, nullptr);
      });
      report.final_policy = descent.best_policy;
      report.final_cost = descent.best_cost;
      report.cost_trace = descent.cost_trace;
      report.descent_converged = descent.converged;
      report.descent_iterations = descent.iterations;
      return report;
    }
    case RunMode::kGreedyInit:
    case RunMode::kFullPipeline: {
      PlanResult planned = plan(instance, config, &clock);
      report.partition = std::move(planned.partition);
      report.cycle_of_agent = planned.assignment.cycle_of_agent;
      report.approach_paths = planned.assignment.approach_paths;
      report.sigma_used = planned.sigma_used;
      report.initial_policy = std::move(planned.policy);
      report.initial_cost = clock.run("evaluate", [&] {
        return simulate(instance, report.initial_policy).cost;
      });

      if (config.mode == RunMode::kGreedyInit) {
        report.final_policy = report.initial_policy;
        report.final_cost = report.initial_cost;
        report.cost_trace = {report.initial_cost};
        return report;
      }
      const DescentResult descent = clock.run("descent", [&] {
        return gradient_descent(instance, report.initial_policy,
                                config.descent, nullptr);
      });
      report.final_policy = descent.best_policy;
      report.final_cost = descent.best_cost;
      report.cost_trace = descent.cost_trace;
      report.descent_converged = descent.converged;
      report.descent_iterations = descent.iterations;
      return report;
    }
  }
  throw std::logic_error("unhandled run mode");
}

}  // namespace permon
