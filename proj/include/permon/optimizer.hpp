#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "permon/policy.hpp"
#include "permon/topology.hpp"

namespace permon {

struct DescentConfig {
  /// Step size at (1-based) iteration l.
  std::function<double(int)> step_rule = [](int l) {
    return 0.25 / std::sqrt(static_cast<double>(l));
  };
  double epsilon = 1e-3;    // stop when no entry moved more than this
  int max_iters = 300;
  double fd_step = 0.05;    // finite-difference probe
  double perturbation_scale = 1.0;
  int threads = 0;          // 0: PERMON_THREADS env or hardware count
};

/// Central finite-difference gradient of the simulated cost J_T with respect
/// to every finite threshold entry (forward difference at the zero boundary;
/// infinite entries have zero gradient). Entries are probed in parallel;
/// results are deterministic regardless of thread count.
ThresholdPolicy cost_gradient(const ProblemInstance& instance,
                              const ThresholdPolicy& policy, double fd_step,
                              int threads = 0);

struct DescentResult {
  ThresholdPolicy best_policy;
  double best_cost = 0.0;
  std::vector<double> cost_trace;  // J_T at iterates 0..n
  bool converged = false;          // stopped by the epsilon rule
  int iterations = 0;
};

/// Projected gradient descent on the thresholds: step along -grad, clamp
/// finite entries at zero, keep the best iterate seen. `log` receives one
/// JSON line per iteration.
DescentResult gradient_descent(const ProblemInstance& instance,
                               const ThresholdPolicy& start,
                               const DescentConfig& config,
                               std::ostream* log = nullptr);

/// Adds independent uniform [0, scale) noise to every finite entry.
ThresholdPolicy perturb_policy(const ThresholdPolicy& policy, double scale,
                               std::uint64_t seed);

/// Thread count resolution used by the parallel helpers.
int resolve_threads(int requested);

}  // namespace permon
