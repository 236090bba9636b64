#pragma once

#include <string>
#include <vector>

#include "permon/policy.hpp"
#include "permon/topology.hpp"

namespace permon {

/// One dwell interval of an agent: arrival at `target`, departure when it
/// left (or the horizon if it was still there at the end).
struct DwellRecord {
  int target = -1;
  double arrival = 0.0;
  double departure = 0.0;
};

/// Event-driven simulation output. Uncertainties are piecewise linear with
/// kinks exactly at event times, so trapezoids over consecutive snapshots
/// integrate them without discretization error.
struct SimulationTrace {
  std::vector<double> event_times;                  // t_0 = 0 ... t_K = T
  std::vector<std::vector<double>> snapshots;       // R at each event time
  std::vector<std::vector<DwellRecord>> itineraries;  // per agent
  std::vector<double> target_contributions;  // (1/T) * integral of R_i
  double cost = 0.0;  // J_T: time-averaged total uncertainty
};

/// Closed-form advance of one target's uncertainty over dt under constant
/// occupancy: grows at rate A when unobserved, drains at A - B*n when
/// observed by n agents, and sticks at zero once depleted.
double integrate_uncertainty(double r0, double uncertainty_rate,
                             double sensing_rate, int occupancy, double dt);

/// Active destination set of agent a dwelling at i: neighbors j whose
/// uncertainty strictly exceeds theta(a,i,j). Sorted by index.
std::vector<int> active_neighbors(const ProblemInstance& instance,
                                  const ThresholdPolicy& policy, int agent,
                                  int i, const std::vector<double>& r);

struct Decision {
  bool departs = false;   // false: no departure condition within the horizon
  double dwell = 0.0;     // time from now until departure
  int next_target = -1;
};

/// Departure analysis for agent `agent` dwelling at `i`, assuming the current
/// occupancy pattern persists (the simulator re-evaluates at every event, so
/// inside the engine the assumption always holds up to the next event).
/// The agent leaves at the first instant its own uncertainty has fallen
/// below theta(a,i,i) (or hit zero) while some neighbor is active; the
/// destination maximizes R_j - theta(a,i,j), ties to the lowest index.
Decision next_decision(const ProblemInstance& instance,
                       const ThresholdPolicy& policy, int agent, int i,
                       const std::vector<double>& r,
                       const std::vector<int>& occupancy,
                       double time_left);

/// Exact event-driven simulation of the fleet under a threshold policy over
/// [0, horizon]. Event classes at equal times are processed in a fixed
/// order (uncertainty zero-hits, then arrivals, then departures; ties within
/// a class by index), making runs bit-for-bit reproducible.
/// `extra_event_times` forces additional snapshot instants (no state change);
/// the integral is invariant to them.
SimulationTrace simulate(const ProblemInstance& instance,
                         const ThresholdPolicy& policy,
                         const std::vector<double>& extra_event_times = {});

/// Recomputes J_T from the stored snapshots (matches SimulationTrace::cost).
double mean_system_uncertainty(const SimulationTrace& trace);

/// Dwell durations per completed tour of `cycle_visits`, scanned from the
/// agent's itinerary. A tour is a maximal run matching the visit sequence
/// starting at its first element; the transient prefix before the first
/// anchor visit is skipped.
std::vector<std::vector<double>> per_tour_dwells(
    const SimulationTrace& trace, int agent,
    const std::vector<int>& cycle_visits);

void save_trace_csv(const SimulationTrace& trace,
                    const ProblemInstance& instance, const std::string& path);
void save_itineraries_csv(const SimulationTrace& trace,
                          const std::string& path);

}  // namespace permon
