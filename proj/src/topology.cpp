#include "permon/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <random>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace permon {

namespace {

void bfs_mark(const std::vector<std::vector<int>>& adj, int start,
              std::vector<char>* seen) {
  std::queue<int> q;
  q.push(start);
  (*seen)[start] = 1;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v : adj[u]) {
      if (!(*seen)[v]) {
        (*seen)[v] = 1;
        q.push(v);
      }
    }
  }
}

}  // namespace

ProblemInstance::ProblemInstance(std::vector<TargetParams> targets,
                                 std::vector<Edge> edges, int num_agents,
                                 std::vector<int> start_targets, double horizon,
                                 double max_speed)
    : targets_(std::move(targets)),
      edges_(std::move(edges)),
      num_agents_(num_agents),
      start_targets_(std::move(start_targets)),
      horizon_(horizon),
      max_speed_(max_speed) {
  const int m = num_targets();
  if (m <= 0) throw std::invalid_argument("instance needs at least one target");
  if (horizon_ <= 0.0) throw std::invalid_argument("horizon must be positive");
  if (num_agents_ < 1) throw std::invalid_argument("need at least one agent");
  if (static_cast<int>(start_targets_.size()) != num_agents_)
    throw std::invalid_argument("one start target per agent required");
  for (int i = 0; i < m; ++i) {
    targets_[i].id = i;
    const TargetParams& t = targets_[i];
    if (t.uncertainty_rate <= 0.0)
      throw std::invalid_argument("uncertainty rate must be positive");
    if (t.sensing_rate <= t.uncertainty_rate)
      throw std::invalid_argument(
          "sensing rate must exceed the uncertainty rate");
    if (t.initial_uncertainty < 0.0)
      throw std::invalid_argument("initial uncertainty must be nonnegative");
  }
  for (int s : start_targets_) {
    if (s < 0 || s >= m) throw std::invalid_argument("start target out of range");
  }

  adjacency_.assign(m, {});
  travel_time_.assign(m, std::vector<double>(m, -1.0));
  for (const Edge& e : edges_) {
    if (e.from < 0 || e.from >= m || e.to < 0 || e.to >= m)
      throw std::invalid_argument("edge endpoint out of range");
    if (e.from == e.to) throw std::invalid_argument("self edges not allowed");
    if (e.travel_time < 0.0)
      throw std::invalid_argument("travel time must be nonnegative");
    if (travel_time_[e.from][e.to] >= 0.0)
      throw std::invalid_argument("duplicate edge");
    travel_time_[e.from][e.to] = e.travel_time;
    adjacency_[e.from].push_back(e.to);
  }
  for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
}

bool ProblemInstance::has_edge(int i, int j) const {
  return travel_time_.at(i).at(j) >= 0.0;
}

double ProblemInstance::travel_time(int i, int j) const {
  double t = travel_time_.at(i).at(j);
  if (t < 0.0) throw std::invalid_argument("no such edge");
  return t;
}

double point_travel_time(const TargetParams& a, const TargetParams& b,
                         double max_speed) {
  if (max_speed <= 0.0) throw std::invalid_argument("speed must be positive");
  return std::hypot(a.x - b.x, a.y - b.y) / max_speed;
}

ValidationReport validate_topology(const ProblemInstance& instance) {
  const int m = instance.num_targets();
  ValidationReport report;

  // Strong connectivity: forward and reverse reachability from node 0.
  std::vector<std::vector<int>> fwd(m), rev(m);
  for (const Edge& e : instance.edges()) {
    fwd[e.from].push_back(e.to);
    rev[e.to].push_back(e.from);
  }
  std::vector<char> seen_f(m, 0), seen_r(m, 0);
  bfs_mark(fwd, 0, &seen_f);
  bfs_mark(rev, 0, &seen_r);
  report.connected = std::all_of(seen_f.begin(), seen_f.end(),
                                 [](char c) { return c != 0; }) &&
                     std::all_of(seen_r.begin(), seen_r.end(),
                                 [](char c) { return c != 0; });

  // Every edge needs two distinct one-stop detours for greedy insertion to
  // always have an alternative site.
  report.bi_triangular = m > 3;
  for (const Edge& e : instance.edges()) {
    int detours = 0;
    for (int k : instance.neighbors(e.from)) {
      if (k != e.to && instance.has_edge(k, e.to)) ++detours;
    }
    if (detours < 2) {
      report.bi_triangular = false;
      report.violations.push_back(e);
    }
  }
  if (m <= 3) report.bi_triangular = false;
  return report;
}

ProblemInstance random_geometric_instance(int num_targets, int num_agents,
                                          double radius, std::uint64_t seed) {
  if (num_targets < 2) throw std::invalid_argument("need at least two targets");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, 600.0);
  const double speed = 50.0;

  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<TargetParams> targets(num_targets);
    for (int i = 0; i < num_targets; ++i) {
      targets[i].id = i;
      targets[i].x = coord(rng);
      targets[i].y = coord(rng);
      targets[i].uncertainty_rate = 1.0;
      targets[i].sensing_rate = 10.0;
      targets[i].initial_uncertainty = 0.5;
    }
    std::vector<Edge> edges;
    for (int i = 0; i < num_targets; ++i) {
      for (int j = i + 1; j < num_targets; ++j) {
        double d = std::hypot(targets[i].x - targets[j].x,
                              targets[i].y - targets[j].y);
        if (d <= radius) {
          edges.push_back({i, j, d / speed, true});
          edges.push_back({j, i, d / speed, true});
        }
      }
    }
    // Connectivity probe on the symmetric edge set.
    std::vector<std::vector<int>> adj(num_targets);
    for (const Edge& e : edges) adj[e.from].push_back(e.to);
    std::vector<char> seen(num_targets, 0);
    bfs_mark(adj, 0, &seen);
    if (!std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; }))
      continue;

    int stride = static_cast<int>(std::lround(
        static_cast<double>(num_targets) / std::max(1, num_agents)));
    stride = std::max(1, stride);
    std::vector<int> starts(num_agents);
    for (int a = 0; a < num_agents; ++a)
      starts[a] = std::min(num_targets - 1, a * stride);
    return ProblemInstance(std::move(targets), std::move(edges), num_agents,
                           std::move(starts), 500.0, speed);
  }
  throw std::runtime_error(
      "could not sample a connected geometric graph; increase the radius");
}

ProblemInstance induced_instance(const ProblemInstance& instance,
                                 const std::vector<int>& keep) {
  if (keep.empty()) throw std::invalid_argument("empty target subset");
  std::vector<int> back(instance.num_targets(), -1);
  std::vector<TargetParams> targets;
  targets.reserve(keep.size());
  for (std::size_t n = 0; n < keep.size(); ++n) {
    int orig = keep[n];
    if (back.at(orig) != -1) throw std::invalid_argument("duplicate in subset");
    back[orig] = static_cast<int>(n);
    targets.push_back(instance.target(orig));
  }
  std::vector<Edge> edges;
  for (const Edge& e : instance.edges()) {
    if (back[e.from] != -1 && back[e.to] != -1) {
      Edge copy = e;
      copy.from = back[e.from];
      copy.to = back[e.to];
      edges.push_back(copy);
    }
  }
  return ProblemInstance(std::move(targets), std::move(edges), 1, {0},
                         instance.horizon(), instance.max_speed());
}

ProblemInstance load_instance_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  nlohmann::json j;
  in >> j;

  std::vector<TargetParams> targets;
  for (const auto& jt : j.at("targets")) {
    TargetParams t;
    t.id = jt.at("id").get<int>() - 1;  // external ids are 1-based
    t.x = jt.at("x").get<double>();
    t.y = jt.at("y").get<double>();
    t.uncertainty_rate = jt.at("A").get<double>();
    t.sensing_rate = jt.at("B").get<double>();
    t.initial_uncertainty = jt.at("R0").get<double>();
    targets.push_back(t);
  }
  std::sort(targets.begin(), targets.end(),
            [](const TargetParams& a, const TargetParams& b) {
              return a.id < b.id;
            });
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i].id != static_cast<int>(i))
      throw std::runtime_error("target ids must be 1..M without gaps");
  }

  double max_speed = j.at("max_speed").get<double>();
  std::vector<Edge> edges;
  for (const auto& je : j.at("edges")) {
    Edge e;
    e.from = je.at("from").get<int>() - 1;
    e.to = je.at("to").get<int>() - 1;
    if (je.contains("rho")) {
      e.travel_time = je.at("rho").get<double>();
    } else {
      if (e.from < 0 || e.to < 0 ||
          e.from >= static_cast<int>(targets.size()) ||
          e.to >= static_cast<int>(targets.size()))
        throw std::runtime_error("edge endpoint out of range");
      e.travel_time =
          point_travel_time(targets[e.from], targets[e.to], max_speed);
      e.derived_from_positions = true;
    }
    edges.push_back(e);
  }

  std::vector<int> starts;
  int num_agents = 0;
  for (const auto& ja : j.at("agents")) {
    (void)ja.at("id");
    starts.push_back(ja.at("start_target").get<int>() - 1);
    ++num_agents;
  }
  double horizon = j.at("horizon").get<double>();
  return ProblemInstance(std::move(targets), std::move(edges), num_agents,
                         std::move(starts), horizon, max_speed);
}

void save_instance_json(const ProblemInstance& instance,
                        const std::string& path) {
  nlohmann::json j;
  j["targets"] = nlohmann::json::array();
  for (const TargetParams& t : instance.targets()) {
    j["targets"].push_back({{"id", t.id + 1},
                            {"x", t.x},
                            {"y", t.y},
                            {"A", t.uncertainty_rate},
                            {"B", t.sensing_rate},
                            {"R0", t.initial_uncertainty}});
  }
  j["edges"] = nlohmann::json::array();
  for (const Edge& e : instance.edges()) {
    nlohmann::json je = {{"from", e.from + 1}, {"to", e.to + 1}};
    if (!e.derived_from_positions) je["rho"] = e.travel_time;
    j["edges"].push_back(je);
  }
  j["agents"] = nlohmann::json::array();
  for (int a = 0; a < instance.num_agents(); ++a) {
    j["agents"].push_back(
        {{"id", a + 1}, {"start_target", instance.start_targets()[a] + 1}});
  }
  j["horizon"] = instance.horizon();
  j["max_speed"] = instance.max_speed();

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write instance file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace permon
