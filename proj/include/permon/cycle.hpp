#pragma once

#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "permon/topology.hpp"

namespace permon {

/// A closed tour over targets, possibly revisiting some of them. Position p
/// holds the physical target visits()[p]; consecutive positions (and the
/// wrap-around) must be graph edges. A tour with all-distinct targets is
/// "unconstrained"; repeated targets make it "constrained" and each repeat
/// is tracked as a separate copy (occurrence 1..n in stored order).
class TargetCycle {
 public:
  TargetCycle() = default;
  explicit TargetCycle(std::vector<int> visits);

  int length() const { return static_cast<int>(visits_.size()); }
  const std::vector<int>& visits() const { return visits_; }
  int target_at(int p) const { return visits_.at(p); }
  /// 1-based copy number of the visit at position p among its target's
  /// occurrences, counted in stored order.
  int occurrence_at(int p) const { return occurrence_.at(p); }
  int multiplicity(int target) const;
  const std::vector<int>& positions_of(int target) const;

  bool is_unconstrained() const { return max_multiplicity_ <= 1; }
  bool contains(int target) const;
  /// Distinct targets covered by the tour.
  std::vector<int> coverage() const;

  /// Throws if any consecutive pair (including the wrap) is not an edge.
  void validate_edges(const ProblemInstance& instance) const;

  /// Travel time into each position from its cyclic predecessor.
  std::vector<double> rho_vector(const ProblemInstance& instance) const;
  double rho_total(const ProblemInstance& instance) const;

  /// Rotation-invariant key, used to detect revisited tours during
  /// refinement.
  std::string canonical_signature() const;

 private:
  std::vector<int> visits_;
  std::vector<int> occurrence_;
  std::vector<std::vector<int>> positions_by_target_;  // sparse map
  std::vector<int> targets_present_;
  int max_multiplicity_ = 0;
};

/// Decomposition of a constrained tour into the per-copy stretches that
/// govern steady state: the stretch of copy i^j runs from the position just
/// after the previous copy i^(j-1) (cyclically) through i^j itself.
struct SubCycleStructure {
  /// Column p = indicator (over positions) of the stretch ending at p.
  /// For a single-occurrence target the stretch is the whole tour.
  Eigen::MatrixXd matrix;
  /// Position of the previous copy of the same target, per position.
  std::vector<int> prev_copy_position;
};

SubCycleStructure sub_cycle_structure(const TargetCycle& cycle);

}  // namespace permon
