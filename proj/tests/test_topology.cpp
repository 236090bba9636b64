#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "fixtures.hpp"
#include "permon/topology.hpp"

using namespace permon;
using namespace permon::testing;

TEST_CASE("instance construction rejects malformed input") {
  auto targets = uniform_targets(3);
  std::vector<Edge> edges;
  add_link(&edges, 0, 1, 1.0);
  add_link(&edges, 1, 2, 1.0);

  CHECK_THROWS_AS(ProblemInstance({}, {}, 1, {0}, 500.0, 50.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(ProblemInstance(targets, edges, 1, {0}, 0.0, 50.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(ProblemInstance(targets, edges, 0, {}, 500.0, 50.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(ProblemInstance(targets, edges, 2, {0}, 500.0, 50.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(ProblemInstance(targets, edges, 1, {3}, 500.0, 50.0),
                  std::invalid_argument);

  auto bad_rates = targets;
  bad_rates[1].sensing_rate = bad_rates[1].uncertainty_rate;
  CHECK_THROWS_AS(ProblemInstance(bad_rates, edges, 1, {0}, 500.0, 50.0),
                  std::invalid_argument);
  bad_rates = targets;
  bad_rates[0].uncertainty_rate = 0.0;
  CHECK_THROWS_AS(ProblemInstance(bad_rates, edges, 1, {0}, 500.0, 50.0),
                  std::invalid_argument);

  auto self_loop = edges;
  self_loop.push_back({2, 2, 1.0, false});
  CHECK_THROWS_AS(ProblemInstance(targets, self_loop, 1, {0}, 500.0, 50.0),
                  std::invalid_argument);
  auto dup = edges;
  dup.push_back({0, 1, 2.0, false});
  CHECK_THROWS_AS(ProblemInstance(targets, dup, 1, {0}, 500.0, 50.0),
                  std::invalid_argument);
  auto out_of_range = edges;
  out_of_range.push_back({0, 7, 1.0, false});
  CHECK_THROWS_AS(ProblemInstance(targets, out_of_range, 1, {0}, 500.0, 50.0),
                  std::invalid_argument);
}

TEST_CASE("adjacency queries") {
  std::vector<Edge> edges;
  add_link(&edges, 0, 2, 1.0);
  add_link(&edges, 0, 1, 2.0);
  edges.push_back({1, 2, 3.0, false});  // one-way
  ProblemInstance inst(uniform_targets(3), edges, 1, {0}, 500.0, 50.0);

  CHECK(inst.neighbors(0) == std::vector<int>{1, 2});
  CHECK(inst.neighbors(1) == std::vector<int>{0, 2});
  CHECK(inst.neighbors(2) == std::vector<int>{0});
  CHECK(inst.has_edge(1, 2));
  CHECK_FALSE(inst.has_edge(2, 1));
  CHECK(inst.travel_time(1, 2) == doctest::Approx(3.0));
  CHECK_THROWS_AS(inst.travel_time(2, 1), std::invalid_argument);
}

TEST_CASE("point travel time is distance over speed") {
  TargetParams a = target(0);
  TargetParams b = target(1);
  a.x = 0.0;
  a.y = 0.0;
  b.x = 30.0;
  b.y = 40.0;
  CHECK(point_travel_time(a, b, 50.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(point_travel_time(a, b, 0.0), std::invalid_argument);
}

TEST_CASE("validate_topology flags connectivity and detour coverage") {
  SUBCASE("complete graph on 5 nodes passes both checks") {
    auto inst = complete_instance(5, 1.0);
    auto report = validate_topology(inst);
    CHECK(report.connected);
    CHECK(report.bi_triangular);
    CHECK(report.violations.empty());
  }
  SUBCASE("triangle is connected but too small for double detours") {
    auto inst = complete_instance(3, 1.0);
    auto report = validate_topology(inst);
    CHECK(report.connected);
    CHECK_FALSE(report.bi_triangular);
  }
  SUBCASE("pendant edge breaks the detour property") {
    auto inst = pendant_instance();
    auto report = validate_topology(inst);
    CHECK(report.connected);
    CHECK_FALSE(report.bi_triangular);
    bool pendant_flagged = false;
    for (const Edge& e : report.violations) {
      if ((e.from == 2 && e.to == 3) || (e.from == 3 && e.to == 2))
        pendant_flagged = true;
    }
    CHECK(pendant_flagged);
  }
  SUBCASE("disconnected graph") {
    std::vector<Edge> edges;
    add_link(&edges, 0, 1, 1.0);
    add_link(&edges, 2, 3, 1.0);
    ProblemInstance inst(uniform_targets(4), edges, 1, {0}, 500.0, 50.0);
    CHECK_FALSE(validate_topology(inst).connected);
  }
}

TEST_CASE("random geometric instances") {
  auto inst = random_geometric_instance(12, 3, 260.0, 7);
  CHECK(inst.num_targets() == 12);
  CHECK(inst.num_agents() == 3);
  CHECK(inst.horizon() == doctest::Approx(500.0));
  CHECK(inst.max_speed() == doctest::Approx(50.0));
  CHECK(validate_topology(inst).connected);

  // Agents are spread along the index range at stride round(M/N).
  CHECK(inst.start_targets() == std::vector<int>{0, 4, 8});

  for (const Edge& e : inst.edges()) {
    CHECK(inst.has_edge(e.to, e.from));  // geometric edges are symmetric
    double d = std::hypot(inst.target(e.from).x - inst.target(e.to).x,
                          inst.target(e.from).y - inst.target(e.to).y);
    CHECK(e.travel_time == doctest::Approx(d / 50.0));
    CHECK(d <= 260.0);
  }
  for (const TargetParams& t : inst.targets()) {
    CHECK(t.uncertainty_rate == doctest::Approx(1.0));
    CHECK(t.sensing_rate == doctest::Approx(10.0));
    CHECK(t.initial_uncertainty == doctest::Approx(0.5));
    CHECK(t.x >= 0.0);
    CHECK(t.x <= 600.0);
    CHECK(t.y >= 0.0);
    CHECK(t.y <= 600.0);
  }

  // Same seed, same instance.
  auto again = random_geometric_instance(12, 3, 260.0, 7);
  REQUIRE(again.num_targets() == inst.num_targets());
  for (int i = 0; i < inst.num_targets(); ++i) {
    CHECK(again.target(i).x == inst.target(i).x);
    CHECK(again.target(i).y == inst.target(i).y);
  }
  CHECK(again.edges().size() == inst.edges().size());
}

TEST_CASE("induced subgraph renumbers and keeps travel times") {
  auto inst = pendant_instance(2.5);
  auto sub = induced_instance(inst, {2, 3, 0});
  CHECK(sub.num_targets() == 3);
  // New indices: 0 -> old 2, 1 -> old 3, 2 -> old 0.
  CHECK(sub.target(0).x == inst.target(2).x);
  CHECK(sub.target(1).x == inst.target(3).x);
  CHECK(sub.has_edge(0, 1));
  CHECK(sub.has_edge(0, 2));
  CHECK_FALSE(sub.has_edge(1, 2));  // old (3,0) was never an edge
  CHECK(sub.travel_time(0, 1) == doctest::Approx(2.5));
  CHECK(sub.num_agents() == 1);

  CHECK_THROWS_AS(induced_instance(inst, {}), std::invalid_argument);
  CHECK_THROWS_AS(induced_instance(inst, {1, 1}), std::invalid_argument);
}

TEST_CASE("instance json round trip") {
  auto inst = random_geometric_instance(8, 2, 300.0, 11);
  auto path = std::filesystem::temp_directory_path() / "permon_inst_test.json";
  save_instance_json(inst, path.string());
  auto loaded = load_instance_json(path.string());

  CHECK(loaded.num_targets() == inst.num_targets());
  CHECK(loaded.num_agents() == inst.num_agents());
  CHECK(loaded.horizon() == doctest::Approx(inst.horizon()));
  CHECK(loaded.max_speed() == doctest::Approx(inst.max_speed()));
  CHECK(loaded.start_targets() == inst.start_targets());
  for (int i = 0; i < inst.num_targets(); ++i) {
    CHECK(loaded.target(i).x == doctest::Approx(inst.target(i).x));
    CHECK(loaded.target(i).uncertainty_rate ==
          doctest::Approx(inst.target(i).uncertainty_rate));
    CHECK(loaded.target(i).sensing_rate ==
          doctest::Approx(inst.target(i).sensing_rate));
    CHECK(loaded.target(i).initial_uncertainty ==
          doctest::Approx(inst.target(i).initial_uncertainty));
  }
  REQUIRE(loaded.edges().size() == inst.edges().size());
  for (int i = 0; i < inst.num_targets(); ++i) {
    for (int j = 0; j < inst.num_targets(); ++j) {
      CHECK(loaded.has_edge(i, j) == inst.has_edge(i, j));
      if (inst.has_edge(i, j))
        CHECK(loaded.travel_time(i, j) ==
              doctest::Approx(inst.travel_time(i, j)));
    }
  }
  std::filesystem::remove(path);
  CHECK_THROWS(load_instance_json("/nonexistent/nowhere.json"));
}
