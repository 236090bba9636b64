#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "permon/topology.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generates random geometric monitoring instances."};

  int targets = 15;
  int agents = 3;
  double radius = 200.0;
  double horizon = 500.0;
  std::uint64_t seed = 0;
  std::string out_path = "instance.json";

  app.add_option("--targets", targets, "number of targets")
      ->check(CLI::PositiveNumber);
  app.add_option("--agents", agents, "number of agents")
      ->check(CLI::PositiveNumber);
  app.add_option("--radius", radius, "connection radius")
      ->check(CLI::PositiveNumber);
  app.add_option("--horizon", horizon, "simulation horizon")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "generator seed");
  app.add_option("--out", out_path, "output JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    permon::ProblemInstance instance =
        permon::random_geometric_instance(targets, agents, radius, seed);
    if (horizon != instance.horizon()) {
      instance = permon::ProblemInstance(
          instance.targets(), instance.edges(), instance.num_agents(),
          instance.start_targets(), horizon, instance.max_speed());
    }
    try {
      permon::save_instance_json(instance, out_path);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 7;
    }
    const permon::ValidationReport topo = permon::validate_topology(instance);
    std::printf("targets=%d agents=%d edges=%zu connected=%d dense_detours=%d\n",
                instance.num_targets(), instance.num_agents(),
                instance.edges().size(), topo.connected ? 1 : 0,
                topo.bi_triangular ? 1 : 0);
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
