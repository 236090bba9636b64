#pragma once

#include <optional>
#include <string>
#include <vector>

#include "permon/cycle.hpp"
#include "permon/cycle_analysis.hpp"
#include "permon/policy.hpp"
#include "permon/topology.hpp"

namespace permon {

/// Barrier value for edges that leave the tour: high enough that no target
/// drained every tour can reach it, so the agent never strays. 5% above the
/// tightest bound (steady tour time * largest uncertainty growth rate).
double recommended_barrier(const ProblemInstance& instance, double tour_time);

/// Threshold matrix that locks a single agent onto `cycle`: zero on the
/// diagonal and on every tour edge (leave when drained, prefer the
/// longest-starved successor), `barrier` on other real edges, infinity on
/// non-edges. Rows of targets not on the tour are inert (diagonal 0,
/// off-diagonal infinity). Works for constrained tours too, where a
/// repeated target's row carries one zero per distinct tour successor.
ThresholdMatrix policy_from_cycle(const ProblemInstance& instance,
                                  const TargetCycle& cycle,
                                  std::optional<double> barrier = std::nullopt);

struct BranchThresholdConfig {
  /// Max ratio between the uncertainty growth rates of a repeated target's
  /// tour successors before the timed branch thresholds kick in.
  double rate_ratio_trigger = 2.0;
  bool force_timed = false;  // apply timed thresholds on every branch row
  /// Off-tour barrier override; defaults to recommended_barrier of this tour.
  std::optional<double> barrier;
};

struct CodegenResult {
  ThresholdMatrix matrix;
  /// Branch entries that came out negative and were clamped to zero,
  /// as (row, col) pairs.
  std::vector<std::pair<int, int>> clamped;
  bool used_timed_branches = false;
};

/// policy_from_cycle plus, for repeated targets whose successors grow at
/// drastically different rates, timed branch thresholds: the threshold on
/// branch successor s is set so s activates when the tour is due there,
/// A_s * (tour_time - dwell_s - travel_into_s - stretch_of_copy/2).
CodegenResult constrained_cycle_thresholds(
    const ProblemInstance& instance, const TargetCycle& cycle,
    const CycleSteadyState& steady,
    const BranchThresholdConfig& config = {});

/// Overlays a chase prefix on `matrix` so an agent starting off the tour
/// follows `path` (sequence of targets ending at a tour target): every path
/// target drains to zero then hands over to the next hop. Throws if an
/// intermediate path target already belongs to the tour (row collision).
void prepend_path_policy(const ProblemInstance& instance,
                         ThresholdMatrix* matrix,
                         const std::vector<int>& path,
                         const TargetCycle& cycle, double barrier);

}  // namespace permon
