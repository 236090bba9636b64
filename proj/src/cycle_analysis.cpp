#include "permon/cycle_analysis.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace permon {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_unconstrained(const TargetCycle& cycle, const char* what) {
  if (!cycle.is_unconstrained())
    throw std::invalid_argument(std::string(what) +
                                " is defined for unconstrained tours only");
}

double spectral_radius_of(const Eigen::MatrixXd& g) {
  const int n = static_cast<int>(g.rows());
  if (n <= 64) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(g, /*computeEigenvectors=*/false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  // Power iteration for large tours; deterministic start.
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x(i) = 1.0 + 1e-3 * (i + 1);
  x.normalize();
  double radius = 0.0;
  for (int it = 0; it < 500; ++it) {
    Eigen::VectorXd y = g * x;
    double norm = y.norm();
    if (norm < 1e-300) return 0.0;
    radius = norm;
    x = y / norm;
  }
  return radius;
}

}  // namespace

DwellDynamics dwell_dynamics_matrices(const ProblemInstance& instance,
                                      const TargetCycle& cycle) {
  require_unconstrained(cycle, "the dwell recursion");
  const int m = cycle.length();
  DwellDynamics d;
  d.delta1 = Eigen::MatrixXd::Zero(m, m);
  d.delta2 = Eigen::MatrixXd::Zero(m, m);
  for (int n = 0; n < m; ++n) {
    const TargetParams& t = instance.target(cycle.target_at(n));
    d.delta1(n, n) = (t.sensing_rate - t.uncertainty_rate) / t.uncertainty_rate;
    for (int k = n + 1; k < m; ++k) {
      d.delta2(n, k) = 1.0;
      d.delta1(k, n) = -1.0;
    }
  }
  return d;
}

Eigen::VectorXd iterate_dwell_dynamics(const ProblemInstance& instance,
                                       const TargetCycle& cycle,
                                       const Eigen::VectorXd& tau0,
                                       int iterations) {
  DwellDynamics d = dwell_dynamics_matrices(instance, cycle);
  const double rho = cycle.rho_total(instance);
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(cycle.length());
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(d.delta1);
  Eigen::VectorXd tau = tau0;
  for (int k = 0; k < iterations; ++k)
    tau = lu.solve(d.delta2 * tau + rho * ones);
  return tau;
}

Eigen::VectorXd equilibrium_dwell_times(const ProblemInstance& instance,
                                        const TargetCycle& cycle) {
  require_unconstrained(cycle, "the closed-form equilibrium");
  const int m = cycle.length();
  Eigen::VectorXd beta(m);
  for (int n = 0; n < m; ++n) {
    const TargetParams& t = instance.target(cycle.target_at(n));
    beta(n) = t.uncertainty_rate / t.sensing_rate;
  }
  double load = beta.sum();
  if (load >= 1.0)
    throw std::domain_error(
        "infeasible tour: total uncertainty-to-sensing load >= 1");
  return beta * (cycle.rho_total(instance) / (1.0 - load));
}

StabilityReport check_schur_stability(const ProblemInstance& instance,
                                      const TargetCycle& cycle) {
  DwellDynamics d = dwell_dynamics_matrices(instance, cycle);
  Eigen::MatrixXd g = d.delta1.partialPivLu().solve(d.delta2);
  StabilityReport report;
  report.spectral_radius = spectral_radius_of(g);
  report.stable = (1.0 - report.spectral_radius) > 1e-9;
  return report;
}

Eigen::VectorXd steady_state_dwell_times(const ProblemInstance& instance,
                                         const TargetCycle& cycle) {
  const int L = cycle.length();
  if (L == 1) return Eigen::VectorXd::Zero(1);
  cycle.validate_edges(instance);
  SubCycleStructure s = sub_cycle_structure(cycle);
  // Row p of the balance system covers p's stretch: the uncertainty a target
  // accumulates while its watcher works through the stretch must drain
  // during the dwell, (B/A)*tau_p = sum over the stretch of (rho + tau).
  Eigen::MatrixXd stretch_rows = s.matrix.transpose();
  Eigen::VectorXd rho(L);
  {
    std::vector<double> rv = cycle.rho_vector(instance);
    for (int p = 0; p < L; ++p) rho(p) = rv[p];
  }
  Eigen::MatrixXd sys = -stretch_rows;
  for (int p = 0; p < L; ++p) {
    const TargetParams& t = instance.target(cycle.target_at(p));
    sys(p, p) += t.sensing_rate / t.uncertainty_rate;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
  if (!lu.isInvertible())
    throw std::domain_error("tour has no steady state: singular balance system");
  return lu.solve(stretch_rows * rho);
}

std::vector<double> stretch_times(const ProblemInstance& instance,
                                  const TargetCycle& cycle,
                                  const Eigen::VectorXd& dwells) {
  const int L = cycle.length();
  SubCycleStructure s = sub_cycle_structure(cycle);
  std::vector<double> rv = cycle.rho_vector(instance);
  std::vector<double> out(L, 0.0);
  for (int p = 0; p < L; ++p) {
    double sum = 0.0;
    for (int q = 0; q < L; ++q) {
      if (s.matrix(q, p) != 0.0) sum += rv[q] + dwells(q);
    }
    out[p] = sum;
  }
  return out;
}

void auxiliary_params(const ProblemInstance& instance, const TargetCycle& cycle,
                      const Eigen::VectorXd& dwells,
                      const std::vector<double>& stretch, double tour_time,
                      std::vector<double>* eff_a, std::vector<double>* eff_b) {
  const int L = cycle.length();
  eff_a->assign(L, 0.0);
  eff_b->assign(L, 0.0);
  for (int p = 0; p < L; ++p) {
    const TargetParams& t = instance.target(cycle.target_at(p));
    if (cycle.multiplicity(cycle.target_at(p)) == 1) {
      (*eff_a)[p] = t.uncertainty_rate;
      (*eff_b)[p] = t.sensing_rate;
      continue;
    }
    double gap = tour_time - dwells(p);
    if (gap <= 0.0)
      throw std::domain_error("degenerate tour: dwell exceeds the tour time");
    double drain = t.sensing_rate - t.uncertainty_rate;
    // Copy p behaves like a standalone target that (a) is due exactly when
    // the tour returns to it and (b) carries its stretch's share of the real
    // target's accumulated uncertainty.
    (*eff_b)[p] = stretch[p] * drain / gap;
    (*eff_a)[p] = (stretch[p] / tour_time) * dwells(p) * drain / gap;
  }
}

CycleSteadyState analyze_cycle(const ProblemInstance& instance,
                               const TargetCycle& cycle) {
  CycleSteadyState out;
  const int L = cycle.length();
  if (L == 1) {
    out.dwell_times = Eigen::VectorXd::Zero(1);
    out.stretch_times = {0.0};
    out.tour_time = 0.0;
    const TargetParams& t = instance.target(cycle.target_at(0));
    out.effective_uncertainty_rate = {t.uncertainty_rate};
    out.effective_sensing_rate = {t.sensing_rate};
    out.cost = 0.0;
    out.feasible = true;
    out.stable = true;
    return out;
  }

  try {
    out.dwell_times = steady_state_dwell_times(instance, cycle);
  } catch (const std::domain_error& e) {
    out.singular = true;
    out.feasible = false;
    out.failure = e.what();
    out.cost = kInf;
    return out;
  }

  const double rho_total = cycle.rho_total(instance);
  // The recursion matrix depends only on the rates and the tour, so report
  // its radius even when the dwell solve lands infeasible.
  if (cycle.is_unconstrained()) {
    StabilityReport stability = check_schur_stability(instance, cycle);
    out.stable = stability.stable;
    out.spectral_radius = stability.spectral_radius;
  }

  double min_dwell = out.dwell_times.minCoeff();
  out.feasible =
      rho_total > 0.0 ? (min_dwell > 0.0) : (min_dwell >= -1e-12);
  if (!out.feasible) {
    out.failure = "infeasible tour: nonpositive steady-state dwell";
    out.cost = kInf;
    return out;
  }

  if (cycle.is_unconstrained() && !out.stable) {
    out.failure = "unstable tour: dwell recursion does not contract";
    out.cost = kInf;
    return out;
  }

  out.stretch_times = stretch_times(instance, cycle, out.dwell_times);
  out.tour_time = rho_total + out.dwell_times.sum();
  try {
    auxiliary_params(instance, cycle, out.dwell_times, out.stretch_times,
                     out.tour_time, &out.effective_uncertainty_rate,
                     &out.effective_sensing_rate);
  } catch (const std::domain_error& e) {
    out.feasible = false;
    out.failure = e.what();
    out.cost = kInf;
    return out;
  }
  double cost = 0.0;
  for (int p = 0; p < L; ++p) {
    cost += 0.5 *
            (out.effective_sensing_rate[p] - out.effective_uncertainty_rate[p]) *
            out.dwell_times(p);
  }
  out.cost = cost;
  return out;
}

double steady_state_cost(const ProblemInstance& instance,
                         const TargetCycle& cycle) {
  CycleSteadyState s = analyze_cycle(instance, cycle);
  if (!s.feasible || !s.stable) throw std::domain_error(s.failure);
  return s.cost;
}

double cycle_cost_or_inf(const ProblemInstance& instance,
                         const TargetCycle& cycle) {
  CycleSteadyState s = analyze_cycle(instance, cycle);
  return (s.feasible && s.stable) ? s.cost : kInf;
}

double neglected_target_cost(const TargetParams& target, double horizon) {
  return target.initial_uncertainty + target.uncertainty_rate * horizon / 2.0;
}

double coverage_objective(const ProblemInstance& instance,
                          const TargetCycle& cycle,
                          const std::vector<int>& universe) {
  double cost = cycle_cost_or_inf(instance, cycle);
  for (int t : universe) {
    if (!cycle.contains(t))
      cost += neglected_target_cost(instance.target(t), instance.horizon());
  }
  return cost;
}

std::string analysis_debug_json(const ProblemInstance& instance,
                                const TargetCycle& cycle) {
  CycleSteadyState s = analyze_cycle(instance, cycle);
  nlohmann::json j;
  j["visits"] = cycle.visits();
  j["feasible"] = s.feasible;
  j["stable"] = s.stable;
  j["singular"] = s.singular;
  if (!s.failure.empty()) j["failure"] = s.failure;
  if (s.feasible) {
    j["dwell_times"] =
        std::vector<double>(s.dwell_times.data(),
                            s.dwell_times.data() + s.dwell_times.size());
    j["stretch_times"] = s.stretch_times;
    j["tour_time"] = s.tour_time;
    j["cost"] = s.cost;
  }
  return j.dump(2);
}

}  // namespace permon
