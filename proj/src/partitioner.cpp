#include "permon/partitioner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "permon/cycle_analysis.hpp"
#include "permon/cycle_builder.hpp"

namespace permon {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::vector<double> covering_tour_disparities(const ProblemInstance& instance,
                                              int source) {
  const int m = instance.num_targets();
  if (source < 0 || source >= m) throw std::out_of_range("source target");
  std::vector<double> label(m, kInf);
  std::vector<std::optional<TargetCycle>> tour(m);
  std::vector<bool> settled(m, false);
  label[source] = 0.0;
  tour[source] = TargetCycle({source});

  // Label setting over joint tours: the labels are not edge-additive, so
  // this is Dijkstra in shape only — an upper-bound heuristic, not an exact
  // shortest anything.
  for (int round = 0; round < m; ++round) {
    int next = -1;
    for (int j = 0; j < m; ++j) {
      if (!settled[j] && (next < 0 || label[j] < label[next])) next = j;
    }
    if (next < 0 || std::isinf(label[next])) break;
    settled[next] = true;
    for (int k : instance.neighbors(next)) {
      if (settled[k]) continue;
      auto grown = expand_to_include(instance, *tour[next], k);
      if (!grown.has_value()) continue;
      const double cost = cycle_cost_or_inf(instance, *grown);
      if (cost < label[k]) {
        label[k] = cost;
        tour[k] = std::move(grown);
      }
    }
  }
  return label;
}

Eigen::MatrixXd disparity_matrix(const ProblemInstance& instance) {
  const int m = instance.num_targets();
  Eigen::MatrixXd d(m, m);
  for (int i = 0; i < m; ++i) {
    const auto row = covering_tour_disparities(instance, i);
    for (int j = 0; j < m; ++j) d(i, j) = row[j];
  }
  // One tour covers both endpoints, so the quantity is symmetric; the
  // heuristic rows may disagree, and the smaller estimate is the tighter one.
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const double best = std::min(d(i, j), d(j, i));
      d(i, j) = best;
      d(j, i) = best;
    }
    d(i, i) = 0.0;
  }
  return d;
}

Eigen::MatrixXd similarity_matrix(const Eigen::MatrixXd& disparity,
                                  double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("kernel width must be > 0");
  Eigen::MatrixXd s(disparity.rows(), disparity.cols());
  for (Eigen::Index i = 0; i < disparity.rows(); ++i) {
    for (Eigen::Index j = 0; j < disparity.cols(); ++j) {
      const double d = disparity(i, j);
      s(i, j) = std::isfinite(d)
                    ? std::exp(-(d * d) / (2.0 * sigma * sigma))
                    : 0.0;
    }
  }
  return s;
}

double median_sigma(const Eigen::MatrixXd& disparity) {
  std::vector<double> values;
  for (Eigen::Index i = 0; i < disparity.rows(); ++i) {
    for (Eigen::Index j = 0; j < disparity.cols(); ++j) {
      if (i != j && std::isfinite(disparity(i, j))) {
        values.push_back(disparity(i, j));
      }
    }
  }
  if (values.empty()) return 1.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  const double median = (n % 2 == 1)
                            ? values[n / 2]
                            : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  return median > 0.0 ? median : 1.0;
}

Laplacians build_laplacians(const Eigen::MatrixXd& similarity) {
  const Eigen::Index m = similarity.rows();
  if (similarity.cols() != m) throw std::invalid_argument("similarity not square");
  Laplacians out;
  out.degree = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double deg = similarity.row(i).sum();
    if (!(deg > 0.0)) {
      throw std::domain_error("isolated row in similarity matrix");
    }
    out.degree(i, i) = deg;
  }
  out.laplacian = out.degree - similarity;
  out.random_walk = out.degree.inverse() * out.laplacian;
  return out;
}

namespace {

struct KMeansResult {
  std::vector<int> labels;
  double inertia = kInf;
};

double squared_distance(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
  return (a - b).squaredNorm();
}

KMeansResult run_kmeans(const Eigen::MatrixXd& points, int k,
                        std::mt19937_64* rng) {
  const int n = static_cast<int>(points.rows());
  Eigen::MatrixXd centers(k, points.cols());

  // k-means++ seeding.
  std::uniform_int_distribution<int> uniform(0, n - 1);
  centers.row(0) = points.row(uniform(*rng));
  std::vector<double> dist2(n);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double best = kInf;
      for (int b = 0; b < c; ++b) {
        best = std::min(best, squared_distance(points.row(i), centers.row(b)));
      }
      dist2[i] = best;
      total += best;
    }
    if (total <= 0.0) {
      centers.row(c) = points.row(uniform(*rng));
      continue;
    }
    std::uniform_real_distribution<double> pick(0.0, total);
    double needle = pick(*rng);
    int chosen = n - 1;
    for (int i = 0; i < n; ++i) {
      needle -= dist2[i];
      if (needle <= 0.0) {
        chosen = i;
        break;
      }
    }
    centers.row(c) = points.row(chosen);
  }

  std::vector<int> labels(n, 0);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(points.row(i), centers.row(0));
      for (int c = 1; c < k; ++c) {
        const double d = squared_distance(points.row(i), centers.row(c));
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (best != labels[i]) {
        labels[i] = best;
        changed = true;
      }
    }
    // Recompute centers; an emptied cluster grabs the point farthest from
    // its own center so every cluster stays populated.
    std::vector<int> count(k, 0);
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    for (int i = 0; i < n; ++i) {
      count[labels[i]]++;
      sums.row(labels[i]) += points.row(i);
    }
    for (int c = 0; c < k; ++c) {
      if (count[c] > 0) {
        centers.row(c) = sums.row(c) / count[c];
        continue;
      }
      int farthest = 0;
      double far_d = -1.0;
      for (int i = 0; i < n; ++i) {
        if (count[labels[i]] <= 1) continue;
        const double d = squared_distance(points.row(i), centers.row(labels[i]));
        if (d > far_d) {
          far_d = d;
          farthest = i;
        }
      }
      count[labels[farthest]]--;
      sums.row(labels[farthest]) -= points.row(farthest);
      if (count[labels[farthest]] > 0) {
        centers.row(labels[farthest]) =
            sums.row(labels[farthest]) / count[labels[farthest]];
      }
      labels[farthest] = c;
      count[c] = 1;
      centers.row(c) = points.row(farthest);
      changed = true;
    }
    if (!changed) break;
  }

  KMeansResult out;
  out.labels = labels;
  out.inertia = 0.0;
  for (int i = 0; i < n; ++i) {
    out.inertia += squared_distance(points.row(i), centers.row(labels[i]));
  }
  return out;
}

}  // namespace

std::vector<int> spectral_clusters(const Laplacians& laplacians, int k,
                                   std::uint64_t seed) {
  const Eigen::Index m = laplacians.laplacian.rows();
  if (k < 1 || k > m) throw std::invalid_argument("cluster count out of range");
  if (k == 1) return std::vector<int>(m, 0);

  // Random-walk eigenvectors via the symmetric normalization: if
  // D^{-1/2} L D^{-1/2} w = lambda w then L_rw (D^{-1/2} w) = lambda (D^{-1/2} w).
  Eigen::VectorXd inv_sqrt(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    inv_sqrt(i) = 1.0 / std::sqrt(laplacians.degree(i, i));
  }
  Eigen::MatrixXd sym = inv_sqrt.asDiagonal() * laplacians.laplacian *
                        inv_sqrt.asDiagonal();
  sym = 0.5 * (sym + sym.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("spectral embedding failed");
  }
  // Eigenvalues ascend, so the leading k columns are the wanted ones.
  Eigen::MatrixXd embedding =
      inv_sqrt.asDiagonal() * solver.eigenvectors().leftCols(k);

  KMeansResult best;
  for (int restart = 0; restart < 20; ++restart) {
    std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(restart));
    KMeansResult attempt = run_kmeans(embedding, k, &rng);
    if (attempt.inertia < best.inertia) best = std::move(attempt);
  }
  return best.labels;
}

namespace {

struct ClusterBuild {
  TargetCycle cycle;
  std::vector<int> neglected;
  double cost = 0.0;
};

double cluster_objective(const ProblemInstance& instance,
                         const TargetCycle& cycle,
                         const std::vector<int>& neglected) {
  double cost = cycle_cost_or_inf(instance, cycle);
  for (int t : neglected) {
    cost += neglected_target_cost(instance.target(t), instance.horizon());
  }
  return cost;
}

ClusterBuild build_cluster(const ProblemInstance& instance,
                           const std::vector<int>& members) {
  if (members.empty()) throw std::invalid_argument("empty cluster");
  if (members.size() == 1) {
    return {TargetCycle({members[0]}), {}, 0.0};
  }
  const ProblemInstance induced = induced_instance(instance, members);
  TargetCycle local({0});
  try {
    const GreedyResult greedy = greedy_constrained(induced, nullptr);
    local = refine(induced, greedy.cycle, nullptr);
  } catch (const std::runtime_error&) {
    // No two members are mutually connected, so a real tour is impossible;
    // park on whichever member is costliest to neglect.
    int best = 0;
    double dearest = -1.0;
    for (int q = 0; q < induced.num_targets(); ++q) {
      const double neglect =
          neglected_target_cost(induced.target(q), induced.horizon());
      if (neglect > dearest) {
        dearest = neglect;
        best = q;
      }
    }
    local = TargetCycle({best});
  }
  std::vector<int> visits;
  visits.reserve(local.length());
  for (int v : local.visits()) visits.push_back(members[v]);
  ClusterBuild out{TargetCycle(visits), {}, 0.0};
  for (int t : members) {
    if (!out.cycle.contains(t)) out.neglected.push_back(t);
  }
  out.cost = cluster_objective(instance, out.cycle, out.neglected);
  return out;
}

}  // namespace

Partition build_partition(const ProblemInstance& instance,
                          const std::vector<std::vector<int>>& clusters) {
  std::vector<int> owner(instance.num_targets(), -1);
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    for (int t : clusters[c]) {
      if (t < 0 || t >= instance.num_targets() || owner[t] != -1) {
        throw std::invalid_argument("clusters must partition the target set");
      }
      owner[t] = static_cast<int>(c);
    }
  }
  for (int t = 0; t < instance.num_targets(); ++t) {
    if (owner[t] == -1) {
      throw std::invalid_argument("clusters must partition the target set");
    }
  }

  Partition out;
  out.total_cost = 0.0;
  for (const auto& cluster : clusters) {
    std::vector<int> members(cluster);
    std::sort(members.begin(), members.end());
    ClusterBuild built = build_cluster(instance, members);
    out.clusters.push_back(std::move(members));
    out.cycles.push_back(std::move(built.cycle));
    out.neglected.push_back(std::move(built.neglected));
    out.costs.push_back(built.cost);
    out.total_cost += built.cost;
  }
  return out;
}

namespace {

struct Exchange {
  double net = 0.0;
  int donor = -1;
  int receiver = -1;
  int target = -1;
  ClusterBuild donor_after;
  TargetCycle receiver_cycle{{0}};
  bool receiver_covers = false;
};

}  // namespace

Partition balance_partition(const ProblemInstance& instance, Partition start,
                            std::ostream* log) {
  const int n_clusters = static_cast<int>(start.clusters.size());
  if (n_clusters <= 1) return start;

  std::vector<int> owner(instance.num_targets(), -1);
  for (int c = 0; c < n_clusters; ++c) {
    for (int t : start.clusters[c]) owner[t] = c;
  }

  const int max_rounds = 20 * instance.num_targets();
  for (int round = 0; round < max_rounds; ++round) {
    std::optional<Exchange> best;
    for (int a = 0; a < n_clusters; ++a) {
      if (start.clusters[a].size() <= 1) continue;  // keep every cluster alive
      for (int t : start.clusters[a]) {
        // Receivers are clusters the target actually touches in the graph.
        std::set<int> receivers;
        for (int v : instance.neighbors(t)) {
          if (owner[v] != a) receivers.insert(owner[v]);
        }
        for (int v = 0; v < instance.num_targets(); ++v) {
          if (owner[v] != a && instance.has_edge(v, t)) receivers.insert(owner[v]);
        }
        if (receivers.empty()) continue;

        std::vector<int> remainder;
        for (int u : start.clusters[a]) {
          if (u != t) remainder.push_back(u);
        }
        ClusterBuild donor_after = build_cluster(instance, remainder);
        const double detach_gain = start.costs[a] - donor_after.cost;

        for (int b : receivers) {
          auto grown = expand_to_include(instance, start.cycles[b], t);
          double receiver_cost;
          bool covers = grown.has_value();
          if (covers) {
            std::vector<int> still_neglected = start.neglected[b];
            receiver_cost =
                cluster_objective(instance, *grown, still_neglected);
          } else {
            receiver_cost =
                start.costs[b] +
                neglected_target_cost(instance.target(t), instance.horizon());
          }
          const double append_gain = start.costs[b] - receiver_cost;
          const double net = detach_gain + append_gain;
          if (net > 1e-9 && (!best.has_value() || net > best->net)) {
            Exchange ex;
            ex.net = net;
            ex.donor = a;
            ex.receiver = b;
            ex.target = t;
            ex.donor_after = donor_after;
            ex.receiver_cycle = covers ? *grown : start.cycles[b];
            ex.receiver_covers = covers;
            best = std::move(ex);
          }
        }
      }
    }
    if (!best.has_value()) break;

    const int a = best->donor;
    const int b = best->receiver;
    const int t = best->target;
    auto& donor_members = start.clusters[a];
    donor_members.erase(std::find(donor_members.begin(), donor_members.end(), t));
    start.cycles[a] = best->donor_after.cycle;
    start.neglected[a] = best->donor_after.neglected;
    start.costs[a] = best->donor_after.cost;

    auto& recv_members = start.clusters[b];
    recv_members.insert(
        std::upper_bound(recv_members.begin(), recv_members.end(), t), t);
    start.cycles[b] = best->receiver_cycle;
    if (!best->receiver_covers) start.neglected[b].push_back(t);
    std::sort(start.neglected[b].begin(), start.neglected[b].end());
    start.costs[b] =
        cluster_objective(instance, start.cycles[b], start.neglected[b]);
    owner[t] = b;

    start.total_cost = 0.0;
    for (double c : start.costs) start.total_cost += c;
    if (log != nullptr) {
      std::ostringstream line;
      line << "{\"event\":\"exchange\",\"round\":" << round
           << ",\"target\":" << t + 1 << ",\"from\":" << a << ",\"to\":" << b
           << ",\"net_gain\":" << best->net
           << ",\"total_cost\":" << start.total_cost << "}";
      *log << line.str() << "\n";
    }
  }
  return start;
}

std::vector<double> dijkstra_travel_times(const ProblemInstance& instance,
                                          int source,
                                          std::vector<int>* predecessor) {
  const int m = instance.num_targets();
  if (source < 0 || source >= m) throw std::out_of_range("source target");
  std::vector<double> dist(m, kInf);
  std::vector<int> pred(m, -1);
  dist[source] = 0.0;
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  heap.push({0.0, source});
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    for (int v : instance.neighbors(u)) {
      const double cand = d + instance.travel_time(u, v);
      if (cand < dist[v]) {
        dist[v] = cand;
        pred[v] = u;
        heap.push({cand, v});
      }
    }
  }
  if (predecessor != nullptr) *predecessor = std::move(pred);
  return dist;
}

std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n || n == 0) {
    throw std::invalid_argument("assignment matrix must be square");
  }
  constexpr double kBig = 1e30;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      a(i, j) = std::isfinite(cost(i, j)) ? cost(i, j) : kBig;
    }
  }

  // Successive shortest augmenting paths with potentials.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> min_v(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = match[j0];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < min_v[j]) {
          min_v[j] = cur;
          way[j] = j0;
        }
        if (min_v[j] < delta) {
          delta = min_v[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          min_v[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> result(n, -1);
  for (int j = 1; j <= n; ++j) result[match[j] - 1] = j - 1;
  return result;
}

Assignment assign_agents(const ProblemInstance& instance,
                         const std::vector<TargetCycle>& cycles,
                         const std::vector<int>& starts) {
  const int n = static_cast<int>(starts.size());
  if (static_cast<int>(cycles.size()) != n) {
    throw std::invalid_argument("need exactly one tour per agent");
  }
  Eigen::MatrixXd cost(n, n);
  std::vector<std::vector<double>> dist(n);
  std::vector<std::vector<int>> pred(n);
  std::vector<std::vector<int>> entry(n, std::vector<int>(n, -1));
  for (int a = 0; a < n; ++a) {
    dist[a] = dijkstra_travel_times(instance, starts[a], &pred[a]);
    for (int b = 0; b < n; ++b) {
      double best = kInf;
      int best_target = -1;
      for (int t : cycles[b].visits()) {
        if (dist[a][t] < best) {
          best = dist[a][t];
          best_target = t;
        }
      }
      cost(a, b) = best;
      entry[a][b] = best_target;
    }
  }

  Assignment out;
  out.cycle_of_agent = min_cost_assignment(cost);
  out.approach_times.resize(n);
  out.approach_paths.resize(n);
  out.total_time = 0.0;
  for (int a = 0; a < n; ++a) {
    const int b = out.cycle_of_agent[a];
    const double h = cost(a, b);
    if (!std::isfinite(h)) {
      throw std::runtime_error("an agent cannot reach its assigned tour");
    }
    out.approach_times[a] = h;
    out.total_time += h;
    std::vector<int> path;
    for (int t = entry[a][b]; t != -1; t = pred[a][t]) path.push_back(t);
    std::reverse(path.begin(), path.end());
    out.approach_paths[a] = std::move(path);
  }
  return out;
}

}  // namespace permon
