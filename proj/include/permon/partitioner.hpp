#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "permon/cycle.hpp"
#include "permon/topology.hpp"

namespace permon {

/// Covering-tour dissimilarity row for `source`: entry j estimates the best
/// steady-state cost of a single tour that watches both source and j,
/// computed label-setting style (settle the cheapest label, then try to grow
/// its tour by each neighbor using the best expansion kind plus refinement).
/// Unreachable targets keep +infinity.
std::vector<double> covering_tour_disparities(const ProblemInstance& instance,
                                              int source);

/// Full matrix of covering-tour dissimilarities. The underlying quantity is
/// symmetric (one tour covers both endpoints), so the label-setting
/// estimates are tightened by keeping the smaller of d(i,j) and d(j,i).
Eigen::MatrixXd disparity_matrix(const ProblemInstance& instance);

/// Gaussian kernel similarity, s_ij = exp(-d_ij^2 / (2 sigma^2)); infinite
/// disparities map to 0.
Eigen::MatrixXd similarity_matrix(const Eigen::MatrixXd& disparity,
                                  double sigma);

/// Median of the finite off-diagonal disparities; the default kernel width.
double median_sigma(const Eigen::MatrixXd& disparity);

struct Laplacians {
  Eigen::MatrixXd degree;      // diagonal row-sum matrix D
  Eigen::MatrixXd laplacian;   // L = D - W
  Eigen::MatrixXd random_walk; // D^{-1} L
};

Laplacians build_laplacians(const Eigen::MatrixXd& similarity);

/// Spectral clustering into k groups: embed each target by the first k
/// random-walk eigenvectors (computed via the symmetric normalization and
/// back-transformed), then k-means with deterministic seeded k-means++ and
/// 20 restarts. Returns cluster index per target.
std::vector<int> spectral_clusters(const Laplacians& laplacians, int k,
                                   std::uint64_t seed);

/// A partition of the targets with one monitoring tour per cluster.
/// Tours live on the induced subgraph of their cluster; cluster members a
/// tour cannot cover are carried as `neglected` and billed at their
/// horizon-averaged unattended cost.
struct Partition {
  std::vector<std::vector<int>> clusters;      // sorted target lists
  std::vector<TargetCycle> cycles;             // in original target indices
  std::vector<std::vector<int>> neglected;     // per cluster
  std::vector<double> costs;                   // per-cluster objective
  double total_cost = 0.0;
};

/// Builds tours for the given cluster assignment (greedy growth + refine on
/// each induced subgraph; singleton clusters get a parked-agent tour).
Partition build_partition(const ProblemInstance& instance,
                          const std::vector<std::vector<int>>& clusters);

/// Border-exchange balancing: each round evaluates moving one border target
/// from its cluster to a neighboring one (receiver pays the tour-growth
/// delta, donor rebuilds its tour from scratch) and executes the single best
/// strictly-improving move. Stops when no move improves or a move would
/// empty a cluster. Deterministic; `log` gets one JSON line per round.
Partition balance_partition(const ProblemInstance& instance, Partition start,
                            std::ostream* log = nullptr);

struct Assignment {
  std::vector<int> cycle_of_agent;            // cluster index per agent
  std::vector<double> approach_times;         // travel time to the tour
  std::vector<std::vector<int>> approach_paths;  // target sequences, start..entry
  double total_time = 0.0;
};

/// Minimum-total-travel assignment of agents to tours: approach time is the
/// cheapest travel time from the agent's start to any tour target (paths by
/// Dijkstra over edge travel times), and the agent-tour matching is solved
/// exactly. Requires as many tours as agents; throws when some agent cannot
/// reach any tour.
Assignment assign_agents(const ProblemInstance& instance,
                         const std::vector<TargetCycle>& cycles,
                         const std::vector<int>& starts);

/// Single-source shortest travel times (and predecessor tree) over the
/// directed edge set.
std::vector<double> dijkstra_travel_times(const ProblemInstance& instance,
                                          int source,
                                          std::vector<int>* predecessor);

/// Exact minimum-cost assignment on a square cost matrix (rows to columns);
/// returns the column of each row. Infinite entries mark forbidden pairs.
std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost);

}  // namespace permon
