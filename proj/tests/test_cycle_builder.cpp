#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "fixtures.hpp"
#include "permon/cycle_analysis.hpp"
#include "permon/cycle_builder.hpp"

using namespace permon;
using namespace permon::testing;

namespace {

/// Best steady-state cost over every all-target distinct-visit tour, by
/// enumeration with the first element pinned (rotations are equivalent).
double brute_force_full_tour_cost(const ProblemInstance& inst) {
  const int m = inst.num_targets();
  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    TargetCycle c(perm);
    try {
      c.validate_edges(inst);
    } catch (...) {
      continue;
    }
    best = std::min(best, cycle_cost_or_inf(inst, c));
  } while (std::next_permutation(perm.begin() + 1, perm.end()));
  return best;
}

}  // namespace

TEST_CASE("best_two_target_cycle picks the cheapest mutual pair") {
  SUBCASE("distinct travel times") {
    std::vector<Edge> edges;
    add_link(&edges, 0, 1, 1.0);
    add_link(&edges, 0, 2, 1.0);
    add_link(&edges, 1, 3, 0.5);
    ProblemInstance inst(uniform_targets(4), edges, 1, {0}, 500.0, 50.0);
    CHECK(best_two_target_cycle(inst).visits() == std::vector<int>{1, 3});
  }
  SUBCASE("ties go to the smallest pair") {
    auto inst = complete_instance(4, 1.0);
    CHECK(best_two_target_cycle(inst).visits() == std::vector<int>{0, 1});
  }
  SUBCASE("no mutual pair throws") {
    std::vector<Edge> edges = {{0, 1, 1.0, false},
                               {1, 2, 1.0, false},
                               {2, 0, 1.0, false}};
    ProblemInstance inst(uniform_targets(3), edges, 1, {0}, 500.0, 50.0);
    CHECK_THROWS(best_two_target_cycle(inst));
  }
}

TEST_CASE("expansion move mechanics") {
  auto k4 = complete_instance(4, 1.0);

  SUBCASE("edge split inserts into the edge leaving the site") {
    TargetCycle c({0, 1, 2});
    CHECK(apply_edge_split(k4, c, 1, 3).visits() ==
          std::vector<int>{0, 1, 3, 2});
    CHECK(apply_edge_split(k4, c, 2, 3).visits() ==
          std::vector<int>{0, 1, 2, 3});
  }
  SUBCASE("edge split needs both replacement edges") {
    auto inst = pendant_instance();
    TargetCycle c({0, 1, 2});
    CHECK_THROWS(apply_edge_split(inst, c, 0, 3));
  }
  SUBCASE("branch insert adds the target plus a fresh anchor copy") {
    TargetCycle c({0, 1, 2});
    auto grown = apply_branch_insert(k4, c, 2, 3);
    CHECK(grown.visits() == std::vector<int>{0, 1, 2, 3, 2});
    CHECK(grown.multiplicity(2) == 2);
  }
  SUBCASE("bracket replace swaps a redundant stretch for the target") {
    TargetCycle c({0, 1, 0, 2});
    auto swapped = apply_bracket_replace(k4, c, 1, 3, 3);
    // The rebuild may start anywhere on the loop; compare up to rotation.
    CHECK(swapped.canonical_signature() ==
          TargetCycle({0, 1, 3, 2}).canonical_signature());
    CHECK(swapped.is_unconstrained());
    // Nothing strictly between adjacent sites.
    CHECK_THROWS(apply_bracket_replace(k4, c, 1, 2, 3));
    // Position 1 is the only copy of target 1; cutting it is not allowed.
    CHECK_THROWS(apply_bracket_replace(k4, c, 0, 2, 3));
  }
}

TEST_CASE("best_expansion reports the recomputable gain") {
  auto inst = pendant_instance();
  TargetCycle start({0, 1});
  auto cand = best_expansion(inst, start, {ExpansionKind::kEdgeSplit}, 500.0);
  REQUIRE(cand.has_value());
  CHECK(cand->kind == ExpansionKind::kEdgeSplit);
  CHECK(cand->target == 2);  // target 3 has no insertion site
  double expected = neglected_target_cost(inst.target(2), 500.0) +
                    cycle_cost_or_inf(inst, start) -
                    cycle_cost_or_inf(inst, cand->result);
  CHECK(cand->gain == doctest::Approx(expected));
  CHECK_NOTHROW(cand->result.validate_edges(inst));
}

TEST_CASE("best_expansion returns nullopt when no move exists") {
  auto inst = pendant_instance();
  // Target 3 is the only uncovered one and edge-split cannot reach it.
  CHECK_FALSE(best_expansion(inst, TargetCycle({0, 1, 2}),
                             {ExpansionKind::kEdgeSplit}, 500.0)
                  .has_value());
  // Branch insertion can: a second copy of 2 escorts 3 into the tour.
  auto cand = best_expansion(
      inst, TargetCycle({0, 1, 2}),
      {ExpansionKind::kEdgeSplit, ExpansionKind::kBranchInsert,
       ExpansionKind::kBracketReplace},
      500.0);
  REQUIRE(cand.has_value());
  CHECK(cand->kind == ExpansionKind::kBranchInsert);
  CHECK(cand->target == 3);
  CHECK(cand->result.multiplicity(2) == 2);
}

TEST_CASE("unconstrained greedy strands targets behind missing detours") {
  auto inst = pendant_instance();
  auto res = greedy_unconstrained(inst);
  CHECK(res.halted);
  CHECK(res.cycle.coverage() == std::vector<int>{0, 1, 2});
  CHECK(res.cycle.is_unconstrained());
}

TEST_CASE("constrained greedy covers the pendant by revisiting its gate") {
  auto inst = pendant_instance();
  auto res = greedy_constrained(inst);
  CHECK_FALSE(res.halted);
  CHECK(res.cycle.coverage() == std::vector<int>{0, 1, 2, 3});
  CHECK(res.cycle.multiplicity(2) == 2);
  CHECK_NOTHROW(res.cycle.validate_edges(inst));
  // Steady state exists for the grown tour.
  CHECK(cycle_cost_or_inf(inst, res.cycle) <
        std::numeric_limits<double>::infinity());
}

TEST_CASE("greedy growth never worsens the coverage objective") {
  auto inst = random_geometric_instance(9, 1, 420.0, 3);
  std::vector<int> universe(9);
  std::iota(universe.begin(), universe.end(), 0);

  auto start = best_two_target_cycle(inst);
  double before = coverage_objective(inst, start, universe);
  auto res = greedy_unconstrained(inst);
  double after = coverage_objective(inst, res.cycle, universe);
  CHECK(after <= before + 1e-9);

  auto resc = greedy_constrained(inst);
  CHECK(coverage_objective(inst, resc.cycle, universe) <= before + 1e-9);
}

TEST_CASE("refine untangles a crossing tour") {
  // Four corners of a rectangle, fully connected; the figure-eight order
  // pays for both diagonals, the perimeter order is optimal.
  std::vector<TargetParams> targets = uniform_targets(4);
  targets[0].x = 0.0;
  targets[0].y = 0.0;
  targets[1].x = 60.0;
  targets[1].y = 0.0;
  targets[2].x = 0.0;
  targets[2].y = 45.0;
  targets[3].x = 60.0;
  targets[3].y = 45.0;
  std::vector<Edge> edges;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      add_link(&edges, i, j,
               point_travel_time(targets[i], targets[j], 50.0));
  ProblemInstance inst(targets, edges, 1, {0}, 500.0, 50.0);

  TargetCycle crossed({0, 3, 1, 2});
  TargetCycle perimeter({0, 1, 3, 2});
  double crossed_cost = cycle_cost_or_inf(inst, crossed);
  double perimeter_cost = cycle_cost_or_inf(inst, perimeter);
  REQUIRE(perimeter_cost < crossed_cost);

  auto refined = refine(inst, crossed);
  CHECK(cycle_cost_or_inf(inst, refined) ==
        doctest::Approx(perimeter_cost));
  CHECK_NOTHROW(refined.validate_edges(inst));
}

TEST_CASE("refine keeps constrained tours valid and no worse") {
  auto inst = pendant_instance();
  auto res = greedy_constrained(inst);
  double before = cycle_cost_or_inf(inst, res.cycle);
  auto refined = refine(inst, res.cycle);
  CHECK_NOTHROW(refined.validate_edges(inst));
  CHECK(cycle_cost_or_inf(inst, refined) <= before + 1e-9);
  CHECK(refined.coverage() == res.cycle.coverage());
}

TEST_CASE("refined greedy lands near the enumerated optimum") {
  auto inst = random_geometric_instance(5, 1, 900.0, 21);  // complete graph
  auto res = greedy_unconstrained(inst);
  REQUIRE_FALSE(res.halted);
  auto refined = refine(inst, res.cycle);
  double ours = cycle_cost_or_inf(inst, refined);
  double best = brute_force_full_tour_cost(inst);
  CHECK(ours <= best * 1.10 + 1e-9);
  CHECK(ours >= best - 1e-9);
}

TEST_CASE("expand_to_include handles degenerate starts") {
  auto inst = pendant_instance();
  SUBCASE("singleton grows into the mutual pair") {
    auto grown = expand_to_include(inst, TargetCycle({2}), 3);
    REQUIRE(grown.has_value());
    CHECK(grown->visits() == std::vector<int>{2, 3});
  }
  SUBCASE("singleton with no mutual link fails") {
    CHECK_FALSE(expand_to_include(inst, TargetCycle({0}), 3).has_value());
  }
  SUBCASE("pair grows by edge split when possible") {
    auto grown = expand_to_include(inst, TargetCycle({0, 1}), 2);
    REQUIRE(grown.has_value());
    CHECK(grown->contains(2));
    CHECK_NOTHROW(grown->validate_edges(inst));
  }
  SUBCASE("unreachable attachment yields nullopt") {
    CHECK_FALSE(expand_to_include(inst, TargetCycle({0, 1}), 3).has_value());
  }
}
