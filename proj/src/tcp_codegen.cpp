#include "permon/tcp_codegen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "permon/cycle_analysis.hpp"

namespace permon {

double recommended_barrier(const ProblemInstance& instance, double tour_time) {
  double max_rate = 0.0;
  for (int i = 0; i < instance.num_targets(); ++i) {
    max_rate = std::max(max_rate, instance.target(i).uncertainty_rate);
  }
  return 1.05 * tour_time * max_rate;
}

ThresholdMatrix policy_from_cycle(const ProblemInstance& instance,
                                  const TargetCycle& cycle,
                                  std::optional<double> barrier) {
  const int m = instance.num_targets();
  ThresholdMatrix theta(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i == j) {
        theta.at(i, j) = 0.0;
      } else {
        theta.at(i, j) = kInfThreshold;
      }
    }
  }
  const int length = cycle.length();
  if (length == 1) return theta;

  cycle.validate_edges(instance);
  double wall;
  if (barrier.has_value()) {
    wall = *barrier;
  } else {
    double tour_time = 0.0;
    try {
      const auto steady = analyze_cycle(instance, cycle);
      if (steady.feasible) tour_time = steady.tour_time;
    } catch (...) {
      tour_time = 0.0;
    }
    if (tour_time <= 0.0) tour_time = cycle.rho_total(instance);
    wall = recommended_barrier(instance, tour_time);
  }

  // Each distinct target on the tour gets: free passage to the targets it
  // hands over to, a high wall on its remaining real edges (so stray agents
  // cannot be grabbed), and untouched self-gate.
  std::map<int, std::set<int>> successors;
  const auto& visits = cycle.visits();
  for (int p = 0; p < length; ++p) {
    successors[visits[p]].insert(visits[(p + 1) % length]);
  }
  for (const auto& [from, nexts] : successors) {
    for (int j : instance.neighbors(from)) {
      theta.at(from, j) = nexts.count(j) ? 0.0 : wall;
    }
  }
  return theta;
}

CodegenResult constrained_cycle_thresholds(const ProblemInstance& instance,
                                           const TargetCycle& cycle,
                                           const CycleSteadyState& steady,
                                           const BranchThresholdConfig& config) {
  if (!steady.feasible) {
    throw std::domain_error("cannot emit thresholds for an infeasible tour");
  }
  CodegenResult result;
  result.matrix = policy_from_cycle(instance, cycle, config.barrier);
  result.used_timed_branches = false;
  const int length = cycle.length();
  if (length <= 1) return result;

  // A target visited more than once has several outgoing tour edges. Zero
  // thresholds on all of them would let the agent leave along whichever
  // branch clears first, losing the intended copy order. When one branch
  // drains much faster than another we instead time-gate each branch: the
  // threshold equals the uncertainty the successor accrues while the agent
  // works through the rest of the loop back to it.
  const auto& visits = cycle.visits();
  const auto rho = cycle.rho_vector(instance);
  const auto structure = sub_cycle_structure(cycle);
  std::map<int, std::vector<int>> positions_by_target;
  for (int p = 0; p < length; ++p) positions_by_target[visits[p]].push_back(p);

  for (const auto& [target, positions] : positions_by_target) {
    // Only revisited targets have a copy order to protect; a single-copy
    // target keeps its plain zero handover even when timing is forced.
    if (positions.size() < 2) continue;
    // Successor rates decide whether zero thresholds stay safe.
    double min_rate = kInfThreshold, max_rate = 0.0;
    for (int p : positions) {
      const int succ = visits[(p + 1) % length];
      const double rate = instance.target(succ).uncertainty_rate;
      min_rate = std::min(min_rate, rate);
      max_rate = std::max(max_rate, rate);
    }
    const bool timed =
        config.force_timed ||
        (min_rate > 0.0 && max_rate / min_rate > config.rate_ratio_trigger);
    if (!timed) continue;

    result.used_timed_branches = true;
    for (int p : positions) {
      const int succ_pos = (p + 1) % length;
      const int succ = visits[succ_pos];
      // The successor's uncertainty at the intended departure moment: it has
      // grown since its last service, i.e. for the whole loop minus its own
      // dwell and the hop into it, shortened by half the stretch that ended
      // at this target's previous copy (the wrap copy for the first one).
      const double gap = steady.tour_time - steady.dwell_times[succ_pos] -
                         rho[succ_pos] -
                         0.5 * steady.stretch_times[structure.prev_copy_position[p]];
      double threshold = instance.target(succ).uncertainty_rate * gap;
      if (threshold < 0.0) {
        result.clamped.push_back({target, succ});
        threshold = 0.0;
      }
      result.matrix.at(target, succ) = threshold;
    }
  }
  return result;
}

void prepend_path_policy(const ProblemInstance& instance, ThresholdMatrix* theta,
                         const std::vector<int>& path, const TargetCycle& cycle,
                         double barrier) {
  if (theta == nullptr) throw std::invalid_argument("null threshold matrix");
  if (path.size() < 2) return;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    const int here = path[k];
    const int next = path[k + 1];
    if (!instance.has_edge(here, next)) {
      throw std::invalid_argument("approach path uses a missing edge");
    }
    if (cycle.contains(here)) {
      throw std::domain_error("approach path runs through the tour itself");
    }
    theta->at(here, here) = 0.0;
    for (int j : instance.neighbors(here)) {
      theta->at(here, j) = (j == next) ? 0.0 : barrier;
    }
  }
}

}  // namespace permon
