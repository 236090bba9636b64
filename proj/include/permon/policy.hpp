#pragma once

#include <limits>
#include <string>
#include <vector>

namespace permon {

class ProblemInstance;

inline constexpr double kInfThreshold = std::numeric_limits<double>::infinity();

/// One agent's M x M threshold matrix. theta(i,i) gates departure from i
/// (leave once uncertainty falls below it), theta(i,j) gates whether
/// neighbor j counts as an active destination (active iff R_j exceeds it).
/// Infinity encodes "never" and is the only legal value on non-edges.
struct ThresholdMatrix {
  int size = 0;
  std::vector<double> v;  // row-major

  ThresholdMatrix() = default;
  explicit ThresholdMatrix(int m, double fill = kInfThreshold)
      : size(m), v(static_cast<std::size_t>(m) * m, fill) {}

  double& at(int i, int j) { return v[static_cast<std::size_t>(i) * size + j]; }
  double at(int i, int j) const {
    return v[static_cast<std::size_t>(i) * size + j];
  }
};

/// Threshold control policy for a whole fleet: one matrix per agent.
struct ThresholdPolicy {
  std::vector<ThresholdMatrix> agents;

  int num_agents() const { return static_cast<int>(agents.size()); }
  double theta(int a, int i, int j) const { return agents[a].at(i, j); }
  double& theta(int a, int i, int j) { return agents[a].at(i, j); }
};

/// Checks shape and the finite-support rule: theta(a,i,j) finite only when
/// i == j or (i,j) is an edge. Throws std::invalid_argument on violation.
void validate_policy(const ProblemInstance& instance,
                     const ThresholdPolicy& policy);

/// Uniform random policy: every diagonal and edge entry drawn from
/// [0, upper), non-edges infinite. Used as the descent baseline.
ThresholdPolicy random_policy(const ProblemInstance& instance, double upper,
                              std::uint64_t seed);

ThresholdPolicy load_policy_json(const std::string& path);
void save_policy_json(const ThresholdPolicy& policy, const std::string& path);
/// One CSV block per agent: M rows of M comma-separated entries, "inf" for
/// absent edges, blank line between agents.
void save_policy_csv(const ThresholdPolicy& policy, const std::string& path);

}  // namespace permon
