#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "permon/cycle_analysis.hpp"
#include "permon/des.hpp"
#include "permon/tcp_codegen.hpp"

using namespace permon;
using namespace permon::testing;

namespace {

/// Two leaves hanging off target 0, both ways, unit hops. Any tour covering
/// both leaves must pass through 0 twice.
ProblemInstance two_leaf_instance(double a1 = 1.0, double a2 = 1.0) {
  auto targets = uniform_targets(3);
  targets[1].uncertainty_rate = a1;
  targets[2].uncertainty_rate = a2;
  std::vector<Edge> edges;
  add_link(&edges, 0, 1, 1.0);
  add_link(&edges, 0, 2, 1.0);
  return ProblemInstance(targets, edges, 1, {0}, 500.0, 50.0);
}

}  // namespace

TEST_CASE("recommended barrier scales with tour time and worst growth rate") {
  auto targets = uniform_targets(3);
  targets[1].uncertainty_rate = 2.0;
  targets[2].uncertainty_rate = 5.0;
  targets[2].sensing_rate = 20.0;
  std::vector<Edge> edges;
  add_link(&edges, 0, 1, 1.0);
  add_link(&edges, 1, 2, 1.0);
  ProblemInstance inst(targets, edges, 1, {0}, 500.0, 50.0);
  CHECK(recommended_barrier(inst, 10.0) == doctest::Approx(52.5));
}

TEST_CASE("policy_from_cycle locks an agent onto a plain tour") {
  auto inst = pendant_instance();
  TargetCycle c({0, 1, 2});
  double barrier = 77.0;
  auto m = policy_from_cycle(inst, c, barrier);

  for (int i = 0; i < 4; ++i) CHECK(m.at(i, i) == doctest::Approx(0.0));
  // Tour edges open; other real edges walled off; non-edges infinite.
  CHECK(m.at(0, 1) == doctest::Approx(0.0));
  CHECK(m.at(1, 2) == doctest::Approx(0.0));
  CHECK(m.at(2, 0) == doctest::Approx(0.0));
  CHECK(m.at(0, 2) == doctest::Approx(barrier));
  CHECK(m.at(1, 0) == doctest::Approx(barrier));
  CHECK(m.at(2, 1) == doctest::Approx(barrier));
  CHECK(m.at(2, 3) == doctest::Approx(barrier));
  CHECK(std::isinf(m.at(0, 3)));
  CHECK(std::isinf(m.at(3, 1)));
  // Rows of off-tour targets are inert.
  CHECK(std::isinf(m.at(3, 2)));

  // Default barrier comes from the tour's own steady state.
  auto defaulted = policy_from_cycle(inst, c);
  auto steady = analyze_cycle(inst, c);
  CHECK(defaulted.at(0, 2) ==
        doctest::Approx(recommended_barrier(inst, steady.tour_time)));
}

TEST_CASE("policy_from_cycle opens every branch of a revisited target") {
  auto inst = two_leaf_instance();
  TargetCycle c({0, 1, 0, 2});
  auto m = policy_from_cycle(inst, c, 50.0);
  CHECK(m.at(0, 1) == doctest::Approx(0.0));
  CHECK(m.at(0, 2) == doctest::Approx(0.0));
  CHECK(m.at(1, 0) == doctest::Approx(0.0));
  CHECK(m.at(2, 0) == doctest::Approx(0.0));
  for (int i = 0; i < 3; ++i) CHECK(m.at(i, i) == doctest::Approx(0.0));
}

TEST_CASE("timed branch thresholds on a symmetric revisit are equal") {
  auto inst = two_leaf_instance();
  TargetCycle c({0, 1, 0, 2});
  auto steady = analyze_cycle(inst, c);
  REQUIRE(steady.feasible);

  // Equal successor growth rates: the timed rule stays off by default.
  auto plain = constrained_cycle_thresholds(inst, c, steady);
  CHECK_FALSE(plain.used_timed_branches);
  CHECK(plain.matrix.at(0, 1) == doctest::Approx(0.0));
  CHECK(plain.matrix.at(0, 2) == doctest::Approx(0.0));

  BranchThresholdConfig config;
  config.force_timed = true;
  auto timed = constrained_cycle_thresholds(inst, c, steady, config);
  CHECK(timed.used_timed_branches);
  CHECK(timed.clamped.empty());
  // tour_time - dwell - travel-in - half the previous copy's stretch,
  // scaled by the successor's growth rate: (40 - 4 - 7 - 10)/7 each way.
  CHECK(timed.matrix.at(0, 1) == doctest::Approx(19.0 / 7.0));
  CHECK(timed.matrix.at(0, 2) == doctest::Approx(19.0 / 7.0));
  // Non-branch rows keep the plain wiring.
  CHECK(timed.matrix.at(1, 0) == doctest::Approx(0.0));
  CHECK(timed.matrix.at(2, 0) == doctest::Approx(0.0));
}

TEST_CASE("lopsided successor rates trigger the timed rule automatically") {
  auto inst = two_leaf_instance(7.0, 1.0);
  TargetCycle c({0, 1, 0, 2});
  auto steady = analyze_cycle(inst, c);
  REQUIRE(steady.feasible);
  CHECK(steady.tour_time == doctest::Approx(40.0));

  auto out = constrained_cycle_thresholds(inst, c, steady);
  CHECK(out.used_timed_branches);
  // The heavy branch is due immediately: its raw threshold is negative and
  // gets pinned at zero.
  REQUIRE(out.clamped.size() == 1);
  CHECK(out.clamped[0] == std::pair<int, int>(0, 1));
  CHECK(out.matrix.at(0, 1) == doctest::Approx(0.0));
  CHECK(out.matrix.at(0, 2) == doctest::Approx(95.0 / 3.0));
}

TEST_CASE("a mild rate imbalance stays below the trigger") {
  auto inst = two_leaf_instance(1.5, 1.0);
  TargetCycle c({0, 1, 0, 2});
  auto steady = analyze_cycle(inst, c);
  auto out = constrained_cycle_thresholds(inst, c, steady);
  CHECK_FALSE(out.used_timed_branches);
  BranchThresholdConfig tight;
  tight.rate_ratio_trigger = 1.2;
  auto out2 = constrained_cycle_thresholds(inst, c, steady, tight);
  CHECK(out2.used_timed_branches);
}

TEST_CASE("generated policies keep the simulated agent on its tour") {
  // Full coverage matters here: a target no tour drains would eventually
  // outgrow any finite barrier and lure the agent off course.
  auto inst = complete_instance(3, 1.0, 1.0, 10.0, 200.0);
  TargetCycle c({0, 1, 2});
  ThresholdPolicy policy;
  policy.agents.push_back(policy_from_cycle(inst, c));
  auto trace = simulate(inst, policy);
  // Order of visits is exactly the tour order, forever.
  const auto& itin = trace.itineraries[0];
  REQUIRE(itin.size() > 10);
  for (std::size_t k = 0; k < itin.size(); ++k)
    CHECK(itin[k].target == c.target_at(static_cast<int>(k) % 3));
}

TEST_CASE("approach prefixes chase the tour and reject collisions") {
  auto inst = pendant_instance();
  TargetCycle c({0, 1});
  auto m = policy_from_cycle(inst, c, 40.0);
  prepend_path_policy(inst, &m, {3, 2, 0}, c, 40.0);

  CHECK(m.at(3, 3) == doctest::Approx(0.0));
  CHECK(m.at(3, 2) == doctest::Approx(0.0));
  CHECK(m.at(2, 2) == doctest::Approx(0.0));
  CHECK(m.at(2, 0) == doctest::Approx(0.0));
  // Other exits from the path stay walled.
  CHECK(m.at(2, 1) == doctest::Approx(40.0));
  CHECK(m.at(2, 3) == doctest::Approx(40.0));
  // Tour rows are untouched by the prefix.
  CHECK(m.at(0, 1) == doctest::Approx(0.0));

  TargetCycle wide({0, 2});
  auto m2 = policy_from_cycle(inst, wide, 40.0);
  // Path tries to route through target 2, which the tour owns.
  CHECK_THROWS(prepend_path_policy(inst, &m2, {3, 2, 0}, wide, 40.0));
}
