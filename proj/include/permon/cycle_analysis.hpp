#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "permon/cycle.hpp"
#include "permon/topology.hpp"

namespace permon {

/// Linear dwell-time dynamics of an unconstrained tour: dwell vector of tour
/// k+1 solves delta1 * tau_{k+1} = delta2 * tau_k + rho_total * 1.
struct DwellDynamics {
  Eigen::MatrixXd delta1;  // lower-triangular: diag (B-A)/A, -1 below
  Eigen::MatrixXd delta2;  // strictly upper-triangular all-ones
};

DwellDynamics dwell_dynamics_matrices(const ProblemInstance& instance,
                                      const TargetCycle& cycle);

/// Runs the tour-to-tour dwell recursion for `iterations` steps.
Eigen::VectorXd iterate_dwell_dynamics(const ProblemInstance& instance,
                                       const TargetCycle& cycle,
                                       const Eigen::VectorXd& tau0,
                                       int iterations);

/// Closed-form fixed point of the dwell recursion (unconstrained tours):
/// tau_i = (A_i/B_i) * rho_total / (1 - sum_j A_j/B_j). Exists and is
/// positive iff sum_j A_j/B_j < 1; throws std::domain_error otherwise.
Eigen::VectorXd equilibrium_dwell_times(const ProblemInstance& instance,
                                        const TargetCycle& cycle);

struct StabilityReport {
  bool stable = false;
  double spectral_radius = 0.0;
};

/// Schur stability of delta1^{-1} * delta2; dense eigensolve for tours up
/// to 64 positions, power iteration beyond. Stable when 1 - radius > 1e-9.
StabilityReport check_schur_stability(const ProblemInstance& instance,
                                      const TargetCycle& cycle);

/// Full steady-state description of a (possibly constrained) tour.
struct CycleSteadyState {
  Eigen::VectorXd dwell_times;          // per position
  std::vector<double> stretch_times;    // per position: travel+dwell of its stretch
  double tour_time = 0.0;               // sum of all travel + dwell
  std::vector<double> effective_uncertainty_rate;  // per position
  std::vector<double> effective_sensing_rate;      // per position
  double cost = 0.0;                    // steady-state mean total uncertainty
  bool feasible = false;                // solvable with positive dwells
  bool singular = false;                // steady-state system has no solution
  bool stable = true;                   // unconstrained tours: Schur check
  double spectral_radius = 0.0;         // unconstrained tours only
  std::string failure;                  // empty when feasible && stable
};

/// Steady-state dwells of a general tour: position p satisfies
/// (B/A at p) * tau_p = sum over p's stretch of (rho + tau). Solved by LU;
/// throws std::domain_error when the system is singular.
Eigen::VectorXd steady_state_dwell_times(const ProblemInstance& instance,
                                         const TargetCycle& cycle);

/// Travel+dwell duration of each position's stretch given its dwells.
std::vector<double> stretch_times(const ProblemInstance& instance,
                                  const TargetCycle& cycle,
                                  const Eigen::VectorXd& dwells);

/// Effective per-copy rates that make each copy of a repeated target behave,
/// inside the expanded tour, like an ordinary target: the pair (A*, B*) that
/// reproduces the copy's dwell and its share of the original target's
/// accumulated uncertainty. Single-occurrence positions keep their physical
/// rates.
void auxiliary_params(const ProblemInstance& instance, const TargetCycle& cycle,
                      const Eigen::VectorXd& dwells,
                      const std::vector<double>& stretch,
                      double tour_time,
                      std::vector<double>* eff_a, std::vector<double>* eff_b);

/// Complete analysis with feasibility/stability flags instead of throws.
CycleSteadyState analyze_cycle(const ProblemInstance& instance,
                               const TargetCycle& cycle);

/// Steady-state mean total uncertainty of the tour's targets,
/// 0.5 * sum_p (B*_p - A*_p) * tau_p. Throws on infeasible/unstable tours.
double steady_state_cost(const ProblemInstance& instance,
                         const TargetCycle& cycle);

/// Like steady_state_cost but returns +infinity for infeasible, unstable or
/// degenerate tours; the form used inside greedy search.
double cycle_cost_or_inf(const ProblemInstance& instance,
                         const TargetCycle& cycle);

/// Time-averaged contribution of a never-visited target over [0, horizon]:
/// R0 + A * horizon / 2.
double neglected_target_cost(const TargetParams& target, double horizon);

/// steady_state_cost(cycle) plus neglected contributions of every target in
/// `universe` the tour does not cover (infeasible tours count as +infinity).
double coverage_objective(const ProblemInstance& instance,
                          const TargetCycle& cycle,
                          const std::vector<int>& universe);

/// Human-readable JSON dump of the analysis (debug aid).
std::string analysis_debug_json(const ProblemInstance& instance,
                                const TargetCycle& cycle);

}  // namespace permon
