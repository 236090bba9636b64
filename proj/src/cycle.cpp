#include "permon/cycle.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace permon {

TargetCycle::TargetCycle(std::vector<int> visits) : visits_(std::move(visits)) {
  if (visits_.empty()) throw std::invalid_argument("empty cycle");
  int max_id = *std::max_element(visits_.begin(), visits_.end());
  int min_id = *std::min_element(visits_.begin(), visits_.end());
  if (min_id < 0) throw std::invalid_argument("negative target in cycle");

  // Adjacent duplicates (including the wrap) would be zero-length hops; a
  // repeated target must have other targets between its copies.
  const int L = length();
  if (L > 1) {
    for (int p = 0; p < L; ++p) {
      if (visits_[p] == visits_[(p + 1) % L])
        throw std::invalid_argument("adjacent repeated visits in cycle");
    }
  }

  occurrence_.resize(L);
  positions_by_target_.assign(max_id + 1, {});
  for (int p = 0; p < L; ++p) {
    auto& positions = positions_by_target_[visits_[p]];
    positions.push_back(p);
    occurrence_[p] = static_cast<int>(positions.size());
  }
  for (int t = 0; t <= max_id; ++t) {
    if (!positions_by_target_[t].empty()) {
      targets_present_.push_back(t);
      max_multiplicity_ = std::max(
          max_multiplicity_, static_cast<int>(positions_by_target_[t].size()));
    }
  }
}

int TargetCycle::multiplicity(int target) const {
  if (target < 0 || target >= static_cast<int>(positions_by_target_.size()))
    return 0;
  return static_cast<int>(positions_by_target_[target].size());
}

const std::vector<int>& TargetCycle::positions_of(int target) const {
  static const std::vector<int> empty;
  if (target < 0 || target >= static_cast<int>(positions_by_target_.size()))
    return empty;
  return positions_by_target_[target];
}

bool TargetCycle::contains(int target) const { return multiplicity(target) > 0; }

std::vector<int> TargetCycle::coverage() const { return targets_present_; }

void TargetCycle::validate_edges(const ProblemInstance& instance) const {
  const int L = length();
  if (L == 1) return;  // parked agent; no edges traversed
  for (int p = 0; p < L; ++p) {
    int from = visits_[p];
    int to = visits_[(p + 1) % L];
    if (from >= instance.num_targets() || to >= instance.num_targets())
      throw std::invalid_argument("cycle target out of range");
    if (!instance.has_edge(from, to))
      throw std::invalid_argument("cycle uses a missing edge");
  }
}

std::vector<double> TargetCycle::rho_vector(
    const ProblemInstance& instance) const {
  const int L = length();
  std::vector<double> rho(L, 0.0);
  if (L == 1) return rho;
  for (int p = 0; p < L; ++p) {
    int prev = (p + L - 1) % L;
    rho[p] = instance.travel_time(visits_[prev], visits_[p]);
  }
  return rho;
}

double TargetCycle::rho_total(const ProblemInstance& instance) const {
  double total = 0.0;
  for (double r : rho_vector(instance)) total += r;
  return total;
}

std::string TargetCycle::canonical_signature() const {
  const int L = length();
  // Lexicographically smallest rotation.
  int best = 0;
  for (int s = 1; s < L; ++s) {
    for (int k = 0; k < L; ++k) {
      int a = visits_[(s + k) % L];
      int b = visits_[(best + k) % L];
      if (a != b) {
        if (a < b) best = s;
        break;
      }
    }
  }
  std::ostringstream out;
  for (int k = 0; k < L; ++k) {
    if (k) out << ',';
    out << visits_[(best + k) % L];
  }
  return out.str();
}

SubCycleStructure sub_cycle_structure(const TargetCycle& cycle) {
  const int L = cycle.length();
  SubCycleStructure s;
  s.matrix = Eigen::MatrixXd::Zero(L, L);
  s.prev_copy_position.resize(L);
  for (int p = 0; p < L; ++p) {
    const auto& positions = cycle.positions_of(cycle.target_at(p));
    // Previous copy in cyclic order; a single-occurrence target is its own
    // predecessor, making its stretch the whole tour.
    int prev = p;
    if (positions.size() > 1) {
      auto it = std::find(positions.begin(), positions.end(), p);
      prev = (it == positions.begin()) ? positions.back() : *(it - 1);
    }
    s.prev_copy_position[p] = prev;
    for (int q = (prev + 1) % L;; q = (q + 1) % L) {
      s.matrix(q, p) = 1.0;
      if (q == p) break;
    }
  }
  return s;
}

}  // namespace permon
