#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace permon {

/// Per-target model parameters. Uncertainty at an unattended target grows at
/// `uncertainty_rate`; each agent dwelling on it removes `sensing_rate`, so a
/// single observer drains it at sensing_rate - uncertainty_rate.
struct TargetParams {
  int id = 0;  // 0-based internal index
  double x = 0.0;
  double y = 0.0;
  double uncertainty_rate = 1.0;   // A_i > 0
  double sensing_rate = 10.0;      // B_i > A_i
  double initial_uncertainty = 0.5;
};

struct Edge {
  int from = 0;
  int to = 0;
  double travel_time = 0.0;
  bool derived_from_positions = false;  // true when rho came from geometry
};

struct ValidationReport {
  bool connected = false;      // strong connectivity of the directed graph
  bool bi_triangular = false;  // every edge has >= 2 distinct two-hop detours
  std::vector<Edge> violations;  // edges lacking the detour property
};

/// A monitoring problem: a target graph plus an agent fleet and horizon.
/// Construction validates structural well-formedness (positive rates,
/// B > A, valid endpoints, no duplicate or self edges, horizon > 0).
/// Connectivity is reported by validate_topology, not forced here, so that
/// induced subgraphs used during partitioning remain representable.
class ProblemInstance {
 public:
  ProblemInstance(std::vector<TargetParams> targets, std::vector<Edge> edges,
                  int num_agents, std::vector<int> start_targets,
                  double horizon, double max_speed);

  int num_targets() const { return static_cast<int>(targets_.size()); }
  int num_agents() const { return num_agents_; }
  double horizon() const { return horizon_; }
  double max_speed() const { return max_speed_; }

  const TargetParams& target(int i) const { return targets_.at(i); }
  const std::vector<TargetParams>& targets() const { return targets_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<int>& start_targets() const { return start_targets_; }

  /// Out-neighborhood of i, sorted by target index.
  const std::vector<int>& neighbors(int i) const { return adjacency_.at(i); }
  bool has_edge(int i, int j) const;
  /// Travel time of edge (i,j); throws if the edge is absent.
  double travel_time(int i, int j) const;

 private:
  std::vector<TargetParams> targets_;
  std::vector<Edge> edges_;
  int num_agents_ = 1;
  std::vector<int> start_targets_;
  double horizon_ = 0.0;
  double max_speed_ = 0.0;
  std::vector<std::vector<int>> adjacency_;
  std::vector<std::vector<double>> travel_time_;  // dense M x M, -1 = no edge
};

/// Euclidean travel time between two targets at the given speed.
double point_travel_time(const TargetParams& a, const TargetParams& b,
                         double max_speed);

/// Strong connectivity plus the two-detours-per-edge property required for
/// the unconstrained greedy expansion to always have an insertion site.
ValidationReport validate_topology(const ProblemInstance& instance);

/// Random geometric instance: M targets uniform on a 600x600 area, symmetric
/// edges between targets closer than `radius`, travel times from geometry.
/// Resamples until the graph is connected (up to 1000 attempts).
/// Agent a (0-based) starts at target a*round(M/N).
ProblemInstance random_geometric_instance(int num_targets, int num_agents,
                                          double radius, std::uint64_t seed);

/// Restriction of an instance to a subset of targets (indices into the
/// original instance, any order). Targets are renumbered 0..k-1 in the order
/// given; `keep` maps new index -> original index. Agents/starts are reset to
/// a single agent at the first kept target (cycle construction on induced
/// subgraphs does not use them).
ProblemInstance induced_instance(const ProblemInstance& instance,
                                 const std::vector<int>& keep);

ProblemInstance load_instance_json(const std::string& path);
void save_instance_json(const ProblemInstance& instance,
                        const std::string& path);

}  // namespace permon
