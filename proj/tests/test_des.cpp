#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "permon/cycle_analysis.hpp"
#include "permon/des.hpp"
#include "permon/policy.hpp"

using namespace permon;
using namespace permon::testing;

namespace {

/// Diagonal and every edge entry zero: drain fully, any starved neighbor is
/// an acceptable destination.
ThresholdPolicy all_zero_policy(const ProblemInstance& inst) {
  ThresholdPolicy policy;
  for (int a = 0; a < inst.num_agents(); ++a) {
    ThresholdMatrix m(inst.num_targets());
    for (int i = 0; i < inst.num_targets(); ++i) {
      m.at(i, i) = 0.0;
      for (int j : inst.neighbors(i)) m.at(i, j) = 0.0;
    }
    policy.agents.push_back(m);
  }
  return policy;
}

}  // namespace

TEST_CASE("integrate_uncertainty closed form") {
  // Unobserved: linear growth.
  CHECK(integrate_uncertainty(0.5, 2.0, 10.0, 0, 3.0) == doctest::Approx(6.5));
  // One observer: drains at B - A.
  CHECK(integrate_uncertainty(5.0, 1.0, 10.0, 1, 0.5) == doctest::Approx(0.5));
  // Sticks at zero once depleted.
  CHECK(integrate_uncertainty(5.0, 1.0, 10.0, 1, 1.0) == doctest::Approx(0.0));
  CHECK(integrate_uncertainty(0.0, 1.0, 10.0, 1, 7.0) == doctest::Approx(0.0));
  // Two observers drain twice as fast (2B - A = 19).
  CHECK(integrate_uncertainty(19.0, 1.0, 10.0, 2, 0.5) ==
        doctest::Approx(9.5));
  // Zero elapsed time is the identity.
  CHECK(integrate_uncertainty(3.25, 1.0, 10.0, 0, 0.0) ==
        doctest::Approx(3.25));
}

TEST_CASE("active_neighbors uses a strict threshold and sorts by index") {
  auto inst = star_instance(4, 1.0);
  auto policy = all_zero_policy(inst);
  policy.agents[0].at(0, 2) = 5.0;

  std::vector<double> r = {0.0, 1.0, 5.0, 2.0};
  CHECK(active_neighbors(inst, policy, 0, 0, r) == std::vector<int>{1, 3});
  r[2] = 5.0 + 1e-6;
  CHECK(active_neighbors(inst, policy, 0, 0, r) == std::vector<int>{1, 2, 3});
  r = {0.0, 0.0, 0.0, 0.0};
  CHECK(active_neighbors(inst, policy, 0, 0, r).empty());
}

TEST_CASE("next_decision departure timing and destination choice") {
  auto inst = pair_instance(10.0);  // A=1, B=10
  auto policy = all_zero_policy(inst);
  std::vector<int> occupancy = {1, 0};

  SUBCASE("drain to zero, then leave for the active neighbor") {
    std::vector<double> r = {5.0, 3.0};
    auto d = next_decision(inst, policy, 0, 0, r, occupancy, 100.0);
    REQUIRE(d.departs);
    CHECK(d.dwell == doctest::Approx(5.0 / 9.0));
    CHECK(d.next_target == 1);
  }
  SUBCASE("positive departure threshold shortens the dwell") {
    policy.agents[0].at(0, 0) = 2.0;
    std::vector<double> r = {5.0, 3.0};
    auto d = next_decision(inst, policy, 0, 0, r, occupancy, 100.0);
    REQUIRE(d.departs);
    CHECK(d.dwell == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("departure waits for a neighbor to activate") {
    policy.agents[0].at(0, 1) = 4.0;
    std::vector<double> r = {5.0, 3.0};  // neighbor reaches 4 at t = 1
    auto d = next_decision(inst, policy, 0, 0, r, occupancy, 100.0);
    REQUIRE(d.departs);
    CHECK(d.dwell == doctest::Approx(1.0).epsilon(1e-4));
  }
  SUBCASE("infinite activation threshold pins the agent") {
    policy.agents[0].at(0, 1) = kInfThreshold;
    std::vector<double> r = {5.0, 3.0};
    auto d = next_decision(inst, policy, 0, 0, r, occupancy, 100.0);
    CHECK_FALSE(d.departs);
  }
}

TEST_CASE("next_decision breaks destination ties toward the lower index") {
  auto inst = star_instance(4, 1.0);
  auto policy = all_zero_policy(inst);
  std::vector<double> r = {1.0, 3.0, 7.0, 7.0};
  std::vector<int> occupancy = {1, 0, 0, 0};
  auto d = next_decision(inst, policy, 0, 0, r, occupancy, 100.0);
  REQUIRE(d.departs);
  CHECK(d.next_target == 2);

  // A lower threshold on 3 flips the margin comparison.
  policy.agents[0].at(0, 2) = 5.0;
  d = next_decision(inst, policy, 0, 0, r, occupancy, 100.0);
  REQUIRE(d.departs);
  CHECK(d.next_target == 3);
}

TEST_CASE("two-target patrol reaches the analytic steady dwell") {
  auto inst = pair_instance(10.0, 1.0, 10.0, 200.0);
  auto policy = all_zero_policy(inst);
  auto trace = simulate(inst, policy);

  REQUIRE_FALSE(trace.itineraries[0].empty());
  // The itinerary alternates between the two targets.
  const auto& visits = trace.itineraries[0];
  CHECK(visits.front().target == 0);
  for (std::size_t k = 1; k < visits.size(); ++k) {
    CHECK(visits[k].target != visits[k - 1].target);
    CHECK(visits[k].arrival >= visits[k - 1].departure);
  }

  // Dwells converge to the steady-state value rho_total*(A/B)/(1-sum A/B),
  // here 20 * 0.1 / 0.8 = 2.5.
  auto dwells = per_tour_dwells(trace, 0, {0, 1});
  REQUIRE(dwells.size() >= 4);
  const auto& late = dwells[dwells.size() - 2];  // last complete tour
  REQUIRE(late.size() == 2);
  CHECK(late[0] == doctest::Approx(2.5).epsilon(1e-3));
  CHECK(late[1] == doctest::Approx(2.5).epsilon(1e-3));
}

TEST_CASE("trace bookkeeping is self-consistent") {
  auto inst = pair_instance(10.0, 1.0, 10.0, 100.0);
  auto policy = all_zero_policy(inst);
  auto trace = simulate(inst, policy);

  REQUIRE(trace.event_times.size() >= 2);
  CHECK(trace.event_times.front() == doctest::Approx(0.0));
  CHECK(trace.event_times.back() == doctest::Approx(100.0));
  for (std::size_t k = 1; k < trace.event_times.size(); ++k)
    CHECK(trace.event_times[k] >= trace.event_times[k - 1]);
  for (const auto& snap : trace.snapshots)
    for (double r : snap) CHECK(r >= -1e-12);

  CHECK(mean_system_uncertainty(trace) == doctest::Approx(trace.cost));
  double total = 0.0;
  for (double c : trace.target_contributions) total += c;
  CHECK(total == doctest::Approx(trace.cost));

  // Forced snapshot instants change the sampling, not the integral.
  auto with_extras = simulate(inst, policy, {0.37, 3.141, 99.5});
  CHECK(with_extras.cost == doctest::Approx(trace.cost).epsilon(1e-12));
  bool found = false;
  for (double t : with_extras.event_times)
    if (std::abs(t - 3.141) < 1e-12) found = true;
  CHECK(found);
}

TEST_CASE("a never-activated neighbor accumulates the unattended average") {
  auto inst = pair_instance(10.0, 1.0, 10.0, 500.0);
  ThresholdPolicy policy;
  ThresholdMatrix m(2);
  m.at(0, 0) = 0.0;  // satisfied immediately once drained...
  m.at(1, 1) = 0.0;
  m.at(0, 1) = kInfThreshold;  // ...but no destination ever activates
  m.at(1, 0) = kInfThreshold;
  policy.agents.push_back(m);

  auto trace = simulate(inst, policy);
  CHECK(trace.itineraries[0].size() == 1);  // parked at the start target
  CHECK(trace.target_contributions[1] == doctest::Approx(250.5));
  CHECK(trace.target_contributions[1] ==
        doctest::Approx(neglected_target_cost(inst.target(1), 500.0)));
  // The watched target drains 0.5 -> 0 in 1/18 time units and stays there.
  CHECK(trace.target_contributions[0] ==
        doctest::Approx((0.5 * (1.0 / 18.0) / 2.0) / 500.0));
}

TEST_CASE("per_tour_dwells skips the transient prefix") {
  auto inst = pair_instance(1.0, 1.0, 10.0, 50.0);
  auto policy = all_zero_policy(inst);
  auto trace = simulate(inst, policy);
  // Scanning for tours anchored at target 1 must ignore the initial dwell
  // at target 0.
  auto dwells = per_tour_dwells(trace, 0, {1, 0});
  REQUIRE_FALSE(dwells.empty());
  const auto& itin = trace.itineraries[0];
  REQUIRE(itin.size() >= 3);
  CHECK(dwells[0][0] ==
        doctest::Approx(itin[1].departure - itin[1].arrival));
  CHECK(dwells[0][1] ==
        doctest::Approx(itin[2].departure - itin[2].arrival));
}
