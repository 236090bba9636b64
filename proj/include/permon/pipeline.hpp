#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "permon/optimizer.hpp"
#include "permon/partitioner.hpp"
#include "permon/policy.hpp"
#include "permon/topology.hpp"

namespace permon {

enum class RunMode {
  kSimulate,          // simulate a provided (or random) policy, export traces
  kGreedyInit,        // plan tours + thresholds, evaluate, no descent
  kFullPipeline,      // plan + descend
  kRandomBaseline,    // random thresholds + descend
};

RunMode parse_run_mode(const std::string& name);  // throws on unknown name

/// Failure inside run_pipeline, tagged with the stage that raised it
/// ("input", "tour", "disparities", "clustering", "balancing", "assignment",
/// "thresholds", "evaluate", "simulate", "descent").
struct PipelineError : std::runtime_error {
  PipelineError(std::string stage_name, const std::string& message)
      : std::runtime_error(stage_name + ": " + message),
        stage(std::move(stage_name)) {}
  std::string stage;
};

struct RunConfig {
  RunMode mode = RunMode::kFullPipeline;
  std::uint64_t seed = 0;
  std::optional<double> sigma;        // kernel width override
  DescentConfig descent;
  std::optional<std::string> policy_path;  // kSimulate: policy to load
  bool refine_tours = true;
};

struct RunReport {
  std::string mode;
  std::uint64_t seed = 0;
  int num_targets = 0;
  int num_agents = 0;
  double sigma_used = 0.0;
  Partition partition;  // one cluster per tour; empty when no tours were built
  std::vector<int> cycle_of_agent;
  std::vector<std::vector<int>> approach_paths;
  ThresholdPolicy initial_policy;
  ThresholdPolicy final_policy;
  double initial_cost = 0.0;             // J_T under the initial policy
  double final_cost = 0.0;               // J_T under the returned policy
  std::vector<double> cost_trace;
  bool descent_converged = false;
  int descent_iterations = 0;
  std::map<std::string, double> stage_ms;  // wall-clock per stage
};

/// End-to-end planning and optimization. Multi-agent runs partition the
/// graph (disparities -> spectral clusters -> balancing), build one tour per
/// cluster, assign agents, emit tour-following thresholds with approach
/// prefixes, then (mode permitting) run projected gradient descent.
/// Single-agent runs plan one tour directly. Deterministic for a fixed
/// seed apart from the stage_ms timings.
RunReport run_pipeline(const ProblemInstance& instance, const RunConfig& config);

/// Writes report.json, cost_trace.csv/svg, topology.svg, partition.json,
/// the initial/final policies and, for simulate runs, the event trace, into
/// `out_dir` (created if missing). SVG bytes depend only on the report and
/// instance.
void render_outputs(const RunReport& report, const ProblemInstance& instance,
                    const std::string& out_dir);

}  // namespace permon
