#include "permon/des.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace permon {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Events closer than this are treated as simultaneous and ordered by class.
constexpr double kCoalesce = 1e-9;

double target_rate(const TargetParams& t, double r, int occupancy) {
  if (occupancy <= 0) return t.uncertainty_rate;
  double rate = t.uncertainty_rate - t.sensing_rate * occupancy;
  if (r <= 0.0 && rate < 0.0) return 0.0;  // drained and held at zero
  return rate;
}

struct DepartureCandidate {
  double when = kInf;
};

// First instant >= now at which the dwell-exit condition holds, assuming
// the current rates persist: own uncertainty below its threshold (or zero)
// while at least one neighbor is active. Exact within a constant-occupancy
// regime; the simulator re-derives it whenever any event changes a rate.
DepartureCandidate departure_candidate(const ProblemInstance& instance,
                                       const ThresholdMatrix& row_owner,
                                       int i, double now,
                                       const std::vector<double>& r,
                                       const std::vector<double>& rates) {
  const double theta_ii = row_owner.at(i, i);
  double t_sat;
  if (r[i] < theta_ii || r[i] <= 0.0) {
    t_sat = now;
  } else if (rates[i] < 0.0 && std::isfinite(theta_ii)) {
    t_sat = now + (r[i] - theta_ii) / (-rates[i]);
  } else {
    return {};
  }

  double best = kInf;
  for (int j : instance.neighbors(i)) {
    const double th = row_owner.at(i, j);
    if (!std::isfinite(th)) continue;
    double open, close;
    if (r[j] > th) {
      open = now;
      close = rates[j] < 0.0 ? now + (r[j] - th) / (-rates[j]) : kInf;
    } else if (rates[j] > 0.0) {
      open = now + (th - r[j]) / rates[j];
      close = kInf;
    } else {
      continue;
    }
    double s = std::max(t_sat, open);
    if (s < close) best = std::min(best, s);
  }
  return {best};
}

// Destination at the departure instant: the active neighbor with the largest
// threshold violation. A neighbor sitting exactly on its threshold counts
// when its uncertainty is rising (the right-limit of the active set), which
// is how crossing-triggered departures resolve.
int pick_destination(const ProblemInstance& instance,
                     const ThresholdMatrix& row_owner, int i,
                     const std::vector<double>& r,
                     const std::vector<double>& rates) {
  int best = -1;
  double best_violation = -kInf;
  for (int j : instance.neighbors(i)) {
    const double th = row_owner.at(i, j);
    if (!std::isfinite(th)) continue;
    const double violation = r[j] - th;
    // The boundary tolerance absorbs the coalescing slide (<= 1e-9 in time,
    // scaled by the drain rate) of a crossing-triggered departure.
    const double tol = 1e-6 * std::max(1.0, th);
    bool eligible = violation > 0.0 || (violation >= -tol && rates[j] > 0.0);
    if (eligible && violation > best_violation) {
      best_violation = violation;
      best = j;
    }
  }
  return best;
}

struct AgentState {
  bool traveling = false;
  int at = -1;          // dwell target, or travel origin
  int dest = -1;        // travel destination
  double arrive = 0.0;  // travel arrival time
};

}  // namespace

double integrate_uncertainty(double r0, double uncertainty_rate,
                             double sensing_rate, int occupancy, double dt) {
  if (dt < 0.0) throw std::invalid_argument("dt must be nonnegative");
  if (r0 < 0.0) r0 = 0.0;
  if (occupancy <= 0) return r0 + uncertainty_rate * dt;
  double rate = uncertainty_rate - sensing_rate * occupancy;
  if (rate >= 0.0) return r0 + rate * dt;
  double hit = r0 / (-rate);
  if (hit >= dt) return r0 + rate * dt;
  return 0.0;  // drained before dt and held at zero
}

std::vector<int> active_neighbors(const ProblemInstance& instance,
                                  const ThresholdPolicy& policy, int agent,
                                  int i, const std::vector<double>& r) {
  std::vector<int> out;
  const ThresholdMatrix& row = policy.agents.at(agent);
  for (int j : instance.neighbors(i)) {
    if (r.at(j) > row.at(i, j)) out.push_back(j);
  }
  return out;
}

Decision next_decision(const ProblemInstance& instance,
                       const ThresholdPolicy& policy, int agent, int i,
                       const std::vector<double>& r,
                       const std::vector<int>& occupancy, double time_left) {
  const int m = instance.num_targets();
  std::vector<double> rates(m);
  for (int k = 0; k < m; ++k)
    rates[k] = target_rate(instance.target(k), r[k], occupancy[k]);
  const ThresholdMatrix& row = policy.agents.at(agent);
  DepartureCandidate cand =
      departure_candidate(instance, row, i, 0.0, r, rates);
  Decision d;
  if (!(cand.when <= time_left)) return d;  // also covers +inf
  std::vector<double> r_then(m);
  for (int k = 0; k < m; ++k) {
    r_then[k] = integrate_uncertainty(r[k], instance.target(k).uncertainty_rate,
                                      instance.target(k).sensing_rate,
                                      occupancy[k], cand.when);
  }
  std::vector<double> rates_then(m);
  for (int k = 0; k < m; ++k)
    rates_then[k] = target_rate(instance.target(k), r_then[k], occupancy[k]);
  int dest = pick_destination(instance, row, i, r_then, rates_then);
  if (dest < 0) return d;
  d.departs = true;
  d.dwell = cand.when;
  d.next_target = dest;
  return d;
}

SimulationTrace simulate(const ProblemInstance& instance,
                         const ThresholdPolicy& policy,
                         const std::vector<double>& extra_event_times) {
  validate_policy(instance, policy);
  const int m = instance.num_targets();
  const int n_agents = instance.num_agents();
  const double horizon = instance.horizon();

  std::vector<double> extras = extra_event_times;
  std::sort(extras.begin(), extras.end());
  std::size_t extra_ptr = 0;
  while (extra_ptr < extras.size() && extras[extra_ptr] <= 0.0) ++extra_ptr;

  std::vector<double> r(m);
  for (int i = 0; i < m; ++i) r[i] = instance.target(i).initial_uncertainty;
  std::vector<int> occupancy(m, 0);
  std::vector<AgentState> agents(n_agents);
  SimulationTrace trace;
  trace.itineraries.resize(n_agents);
  for (int a = 0; a < n_agents; ++a) {
    int s = instance.start_targets()[a];
    agents[a].at = s;
    occupancy[s] += 1;
    trace.itineraries[a].push_back({s, 0.0, horizon});
  }
  trace.target_contributions.assign(m, 0.0);

  double t = 0.0;
  trace.event_times.push_back(0.0);
  trace.snapshots.push_back(r);

  // Event classes: 0 uncertainty zero-hit, 1 arrival, 2 departure,
  // 3 snapshot-only (horizon end / forced snapshot).
  enum { kZero = 0, kArrival = 1, kDeparture = 2, kSnapshot = 3 };

  const long iter_cap = 20'000'000;
  long iters = 0;
  bool done = false;
  std::vector<double> rates(m);
  // Livelock escape hatch: if a departure fires but no destination clears the
  // eligibility tolerance (sub-nanosecond scheduling corner), the agent's
  // next attempt is pushed back a hair instead of re-firing identically.
  std::vector<double> suppress_until(n_agents, 0.0);

  while (!done) {
    if (++iters > iter_cap)
      throw std::runtime_error("simulation event cap exceeded");

    for (int i = 0; i < m; ++i)
      rates[i] = target_rate(instance.target(i), r[i], occupancy[i]);

    double best_time = horizon;
    int best_class = kSnapshot;
    int best_index = -1;

    auto consider = [&](double when, int cls, int idx) {
      if (when > horizon) return;
      if (when < best_time - kCoalesce ||
          (when <= best_time + kCoalesce &&
           (cls < best_class || (cls == best_class && idx < best_index)))) {
        best_time = std::min(best_time, std::max(when, t));
        best_class = cls;
        best_index = idx;
      }
    };

    for (int i = 0; i < m; ++i) {
      if (r[i] > 0.0 && rates[i] < 0.0)
        consider(t + r[i] / (-rates[i]), kZero, i);
    }
    for (int a = 0; a < n_agents; ++a) {
      if (agents[a].traveling) consider(agents[a].arrive, kArrival, a);
    }
    for (int a = 0; a < n_agents; ++a) {
      if (agents[a].traveling) continue;
      DepartureCandidate cand = departure_candidate(
          instance, policy.agents[a], agents[a].at, t, r, rates);
      if (std::isfinite(cand.when))
        consider(std::max(cand.when, suppress_until[a]), kDeparture, a);
    }
    if (extra_ptr < extras.size())
      consider(extras[extra_ptr], kSnapshot, 1000000);

    // Advance uncertainties linearly to the event instant; the scheduling
    // above guarantees no zero-hit hides inside the step, so trapezoids are
    // exact.
    double dt = best_time - t;
    if (dt > 0.0) {
      for (int i = 0; i < m; ++i) {
        double r_new = r[i] + rates[i] * dt;
        if (r_new < 0.0) r_new = 0.0;
        trace.target_contributions[i] += 0.5 * (r[i] + r_new) * dt;
        r[i] = r_new;
      }
      t = best_time;
    }

    switch (best_class) {
      case kZero:
        r[best_index] = 0.0;
        break;
      case kArrival: {
        AgentState& ag = agents[best_index];
        ag.traveling = false;
        ag.at = ag.dest;
        ag.dest = -1;
        occupancy[ag.at] += 1;
        trace.itineraries[best_index].push_back({ag.at, t, horizon});
        break;
      }
      case kDeparture: {
        AgentState& ag = agents[best_index];
        for (int i = 0; i < m; ++i)
          rates[i] = target_rate(instance.target(i), r[i], occupancy[i]);
        int dest = pick_destination(instance, policy.agents[best_index], ag.at,
                                    r, rates);
        if (dest >= 0) {
          trace.itineraries[best_index].back().departure = t;
          occupancy[ag.at] -= 1;
          ag.traveling = true;
          ag.dest = dest;
          ag.arrive = t + instance.travel_time(ag.at, dest);
        } else {
          suppress_until[best_index] = t + 1e-7;
        }
        break;
      }
      case kSnapshot:
        if (best_index == 1000000) {
          ++extra_ptr;
        } else {
          done = true;  // horizon end
        }
        break;
      default:
        break;
    }

    if (!trace.event_times.empty() && trace.event_times.back() == t) {
      trace.snapshots.back() = r;
    } else {
      trace.event_times.push_back(t);
      trace.snapshots.push_back(r);
    }
  }

  for (int a = 0; a < n_agents; ++a) {
    if (!agents[a].traveling) trace.itineraries[a].back().departure = horizon;
  }
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    trace.target_contributions[i] /= horizon;
    total += trace.target_contributions[i];
  }
  trace.cost = total;
  return trace;
}

double mean_system_uncertainty(const SimulationTrace& trace) {
  if (trace.event_times.size() < 2) return 0.0;
  double integral = 0.0;
  for (std::size_t k = 0; k + 1 < trace.event_times.size(); ++k) {
    double dt = trace.event_times[k + 1] - trace.event_times[k];
    const auto& a = trace.snapshots[k];
    const auto& b = trace.snapshots[k + 1];
    for (std::size_t i = 0; i < a.size(); ++i)
      integral += 0.5 * (a[i] + b[i]) * dt;
  }
  return integral / (trace.event_times.back() - trace.event_times.front());
}

std::vector<std::vector<double>> per_tour_dwells(
    const SimulationTrace& trace, int agent,
    const std::vector<int>& cycle_visits) {
  const auto& itin = trace.itineraries.at(agent);
  const std::size_t L = cycle_visits.size();
  std::vector<std::vector<double>> tours;
  if (L == 0) return tours;
  std::size_t k = 0;
  while (k + L < itin.size()) {  // require a record after the tour: complete
    if (itin[k].target != cycle_visits[0]) {
      ++k;
      continue;
    }
    bool match = true;
    for (std::size_t p = 0; p < L; ++p) {
      if (itin[k + p].target != cycle_visits[p]) {
        match = false;
        break;
      }
    }
    if (!match) {
      ++k;
      continue;
    }
    std::vector<double> dwells(L);
    for (std::size_t p = 0; p < L; ++p)
      dwells[p] = itin[k + p].departure - itin[k + p].arrival;
    tours.push_back(std::move(dwells));
    k += L;
  }
  return tours;
}

void save_trace_csv(const SimulationTrace& trace,
                    const ProblemInstance& instance, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace file: " + path);
  out << "time";
  for (int i = 0; i < instance.num_targets(); ++i) out << ",R_" << (i + 1);
  out << "\n";
  char buf[32];
  for (std::size_t k = 0; k < trace.event_times.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.9g", trace.event_times[k]);
    out << buf;
    for (double v : trace.snapshots[k]) {
      std::snprintf(buf, sizeof(buf), "%.9g", v);
      out << "," << buf;
    }
    out << "\n";
  }
}

void save_itineraries_csv(const SimulationTrace& trace,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write itinerary file: " + path);
  out << "agent,target,arrival,departure\n";
  char buf[32];
  for (std::size_t a = 0; a < trace.itineraries.size(); ++a) {
    for (const DwellRecord& rec : trace.itineraries[a]) {
      out << (a + 1) << "," << (rec.target + 1);
      std::snprintf(buf, sizeof(buf), "%.9g", rec.arrival);
      out << "," << buf;
      std::snprintf(buf, sizeof(buf), "%.9g", rec.departure);
      out << "," << buf << "\n";
    }
  }
}

}  // namespace permon
