#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "permon/cycle.hpp"
#include "permon/cycle_analysis.hpp"
#include "permon/topology.hpp"

namespace permon {

/// Cheapest two-target loop over mutually connected pairs; ties broken by
/// the lexicographically smallest pair. Throws if no mutual pair exists.
TargetCycle best_two_target_cycle(const ProblemInstance& instance);

enum class ExpansionKind { kEdgeSplit, kBranchInsert, kBracketReplace };

/// One candidate expansion of a tour by a currently uncovered target.
/// `gain` is the horizon-averaged benefit of covering `target` this way:
/// its neglected-target contribution plus the steady-state cost delta.
struct ExpansionCandidate {
  ExpansionKind kind = ExpansionKind::kEdgeSplit;
  int target = -1;  // the newly covered target
  int site_a = -1;  // position defining the insertion site
  int site_b = -1;  // second position (bracket end) for kBracketReplace
  double gain = 0.0;
  TargetCycle result;
};

/// Inserts `target` into the edge leaving position `site` (tour order
/// preserved elsewhere). Requires both replacement edges to exist.
TargetCycle apply_edge_split(const ProblemInstance& instance,
                             const TargetCycle& cycle, int site, int target);

/// Inserts `target` followed by a fresh copy of the anchor position's target
/// right after position `site`; needs the anchor-target edge both ways.
TargetCycle apply_branch_insert(const ProblemInstance& instance,
                                const TargetCycle& cycle, int site, int target);

/// Replaces the positions strictly between `site_a` and `site_b` (cyclic,
/// all of them copies of targets that stay covered elsewhere) with `target`.
TargetCycle apply_bracket_replace(const ProblemInstance& instance,
                                  const TargetCycle& cycle, int site_a,
                                  int site_b, int target);

/// Best candidate of each requested kind for every uncovered target, or
/// nullopt if no structurally valid candidate exists. Ties broken by
/// (kind, target, site). `log` (optional) receives one JSON line per
/// candidate evaluated.
std::optional<ExpansionCandidate> best_expansion(
    const ProblemInstance& instance, const TargetCycle& cycle,
    const std::vector<ExpansionKind>& kinds, double horizon,
    std::ostream* log = nullptr);

struct GreedyResult {
  TargetCycle cycle;
  bool halted = false;  // stopped with targets uncovered for lack of sites
};

/// Greedy tour growth by repeated best edge-split insertion while the gain
/// stays nonnegative. On sparse graphs the candidate set can dry up before
/// every target is covered; that outcome is flagged `halted`.
GreedyResult greedy_unconstrained(const ProblemInstance& instance,
                                  std::ostream* log = nullptr);

/// Greedy growth with all three expansion kinds. Preference on ties:
/// edge-split, then branch-insert, then bracket-replace; executes only
/// strictly positive gains. On connected graphs branch insertion can always
/// extend the tour, so the result covers every target reachable via
/// positive-gain moves.
GreedyResult greedy_constrained(const ProblemInstance& instance,
                                std::ostream* log = nullptr);

/// Local search on the tour. Unconstrained tours: best-improvement 2-opt
/// (segment reversal, gated on reverse edges) and the orientation-preserving
/// 3-opt segment exchange, repeated until no move strictly improves.
/// Constrained tours additionally treat copies of the same target as linked
/// by zero-cost virtual edges; moves that make copies adjacent merge them,
/// stretches of redundant copies between two endpoints with a direct edge
/// are cut out, and a move is kept when it does not worsen the steady-state
/// cost (a visited-tour set prevents cycling through equal-cost tours).
TargetCycle refine(const ProblemInstance& instance, const TargetCycle& cycle,
                   std::ostream* log = nullptr);

/// Cheapest way to grow `cycle` by `target` using the best of the three
/// expansion kinds followed by refinement. Nullopt when no kind applies.
std::optional<TargetCycle> expand_to_include(const ProblemInstance& instance,
                                             const TargetCycle& cycle,
                                             int target);

}  // namespace permon
