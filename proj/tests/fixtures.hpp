#pragma once

// Shared fixture builders for the unit tests. All instances use explicit
// travel times (no geometry) unless stated otherwise.

#include <vector>

#include "permon/topology.hpp"

namespace permon::testing {

inline TargetParams target(int id, double a = 1.0, double b = 10.0,
                           double r0 = 0.5) {
  TargetParams t;
  t.id = id;
  t.x = static_cast<double>(id);
  t.y = 0.0;
  t.uncertainty_rate = a;
  t.sensing_rate = b;
  t.initial_uncertainty = r0;
  return t;
}

inline std::vector<TargetParams> uniform_targets(int m, double a = 1.0,
                                                 double b = 10.0,
                                                 double r0 = 0.5) {
  std::vector<TargetParams> out;
  for (int i = 0; i < m; ++i) out.push_back(target(i, a, b, r0));
  return out;
}

/// Both directions of (i,j) with the same travel time.
inline void add_link(std::vector<Edge>* edges, int i, int j, double rho) {
  edges->push_back({i, j, rho, false});
  edges->push_back({j, i, rho, false});
}

/// Two mutually connected targets, rho each way.
inline ProblemInstance pair_instance(double rho, double a = 1.0,
                                     double b = 10.0, double horizon = 500.0) {
  std::vector<Edge> edges;
  add_link(&edges, 0, 1, rho);
  return ProblemInstance(uniform_targets(2, a, b), edges, 1, {0}, horizon,
                         50.0);
}

/// Bidirectional ring 0-1-...-(m-1)-0, uniform hop time.
inline ProblemInstance ring_instance(int m, double hop, double a = 1.0,
                                     double b = 10.0, double horizon = 500.0,
                                     int agents = 1) {
  std::vector<Edge> edges;
  for (int i = 0; i < m; ++i) add_link(&edges, i, (i + 1) % m, hop);
  std::vector<int> starts(agents, 0);
  return ProblemInstance(uniform_targets(m, a, b), edges, agents, starts,
                         horizon, 50.0);
}

/// Complete bidirectional graph, uniform hop time.
inline ProblemInstance complete_instance(int m, double hop, double a = 1.0,
                                         double b = 10.0,
                                         double horizon = 500.0,
                                         int agents = 1) {
  std::vector<Edge> edges;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) add_link(&edges, i, j, hop);
  std::vector<int> starts(agents, 0);
  return ProblemInstance(uniform_targets(m, a, b), edges, agents, starts,
                         horizon, 50.0);
}

/// Star with hub 0 and mutual spokes to 1..m-1: the shape that forces
/// revisits of the hub into any tour covering several leaves.
inline ProblemInstance star_instance(int m, double hop, double a = 1.0,
                                     double b = 10.0,
                                     double horizon = 500.0) {
  std::vector<Edge> edges;
  for (int i = 1; i < m; ++i) add_link(&edges, 0, i, hop);
  return ProblemInstance(uniform_targets(m, a, b), edges, 1, {0}, horizon,
                         50.0);
}

/// Triangle {0,1,2} plus a pendant target 3 hanging off 2. The unconstrained
/// greedy covers the triangle and strands the pendant; the constrained
/// builder reaches it by revisiting 2.
inline ProblemInstance pendant_instance(double hop = 1.0,
                                        double horizon = 500.0) {
  std::vector<Edge> edges;
  add_link(&edges, 0, 1, hop);
  add_link(&edges, 0, 2, hop);
  add_link(&edges, 1, 2, hop);
  add_link(&edges, 2, 3, hop);
  return ProblemInstance(uniform_targets(4), edges, 1, {0}, horizon, 50.0);
}

}  // namespace permon::testing
