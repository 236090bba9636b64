#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "permon/pipeline.hpp"
#include "permon/topology.hpp"

namespace {

// Exit codes: 0 ok, 2 input, 3 partition, 4 tour/simulation, 5 threshold
// generation, 6 descent, 7 output writing.
int stage_exit_code(const std::string& stage) {
  if (stage == "input") return 2;
  if (stage == "disparities" || stage == "clustering" ||
      stage == "balancing" || stage == "assignment") {
    return 3;
  }
  if (stage == "tour" || stage == "evaluate" || stage == "simulate") return 4;
  if (stage == "thresholds") return 5;
  if (stage == "descent") return 6;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Plans monitoring tours on a target graph, emits threshold control "
      "policies, and tunes them against the event-driven simulator."};

  std::string instance_path;
  std::string mode = "full-pipeline";
  std::string out_dir = "permon-out";
  std::string policy_path;
  std::uint64_t seed = 0;
  double sigma = 0.0;
  double epsilon = 1e-3;
  int max_iters = 300;
  double fd_step = 0.05;

  app.add_option("--instance", instance_path, "instance JSON file")
      ->required();
  app.add_option(
      "--mode", mode,
      "simulate | greedy-init | full-pipeline | random-init-baseline");
  app.add_option("--seed", seed, "root seed for all randomized stages");
  app.add_option("--out", out_dir, "output directory");
  auto* sigma_opt = app.add_option(
      "--sigma", sigma, "similarity kernel width (default: median heuristic)");
  app.add_option("--epsilon", epsilon, "descent stop threshold");
  app.add_option("--max-iters", max_iters, "descent iteration cap");
  app.add_option("--fd-step", fd_step, "finite-difference probe size");
  app.add_option("--policy", policy_path,
                 "threshold policy JSON (simulate mode input)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  permon::RunConfig config;
  try {
    config.mode = permon::parse_run_mode(mode);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  config.seed = seed;
  if (sigma_opt->count() > 0) config.sigma = sigma;
  config.descent.epsilon = epsilon;
  config.descent.max_iters = max_iters;
  config.descent.fd_step = fd_step;
  if (!policy_path.empty()) config.policy_path = policy_path;

  try {
    const permon::ProblemInstance instance =
        permon::load_instance_json(instance_path);

    permon::RunReport report;
    try {
      report = permon::run_pipeline(instance, config);
    } catch (const permon::PipelineError& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return stage_exit_code(e.stage);
    }

    try {
      permon::render_outputs(report, instance, out_dir);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: output: %s\n", e.what());
      return 7;
    }

    std::printf("mode=%s targets=%d agents=%d seed=%llu\n",
                report.mode.c_str(), report.num_targets, report.num_agents,
                static_cast<unsigned long long>(report.seed));
    std::printf("initial_cost=%.6g final_cost=%.6g\n", report.initial_cost,
                report.final_cost);
    std::printf("outputs=%s\n", out_dir.c_str());
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
