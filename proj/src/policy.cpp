#include "permon/policy.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "permon/topology.hpp"

namespace permon {

void validate_policy(const ProblemInstance& instance,
                     const ThresholdPolicy& policy) {
  const int m = instance.num_targets();
  if (policy.num_agents() != instance.num_agents())
    throw std::invalid_argument("policy agent count mismatch");
  for (const ThresholdMatrix& mat : policy.agents) {
    if (mat.size != m) throw std::invalid_argument("policy size mismatch");
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        double th = mat.at(i, j);
        if (std::isnan(th) || th < 0.0)
          throw std::invalid_argument("thresholds must be >= 0");
        if (std::isfinite(th) && i != j && !instance.has_edge(i, j))
          throw std::invalid_argument(
              "finite threshold on a non-edge entry");
      }
    }
  }
}

ThresholdPolicy random_policy(const ProblemInstance& instance, double upper,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, upper);
  const int m = instance.num_targets();
  ThresholdPolicy policy;
  for (int a = 0; a < instance.num_agents(); ++a) {
    ThresholdMatrix mat(m);
    for (int i = 0; i < m; ++i) {
      mat.at(i, i) = dist(rng);
      for (int j : instance.neighbors(i)) mat.at(i, j) = dist(rng);
    }
    policy.agents.push_back(std::move(mat));
  }
  return policy;
}

namespace {

nlohmann::json entry_to_json(double th) {
  if (std::isinf(th)) return "inf";
  return th;
}

double entry_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kInfThreshold;
    throw std::runtime_error("unknown threshold sentinel");
  }
  return j.get<double>();
}

}  // namespace

ThresholdPolicy load_policy_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open policy file: " + path);
  nlohmann::json j;
  in >> j;
  ThresholdPolicy policy;
  int m = j.at("M").get<int>();
  for (const auto& ja : j.at("agents")) {
    ThresholdMatrix mat(m);
    const auto& rows = ja.at("theta");
    if (static_cast<int>(rows.size()) != m)
      throw std::runtime_error("policy row count mismatch");
    for (int i = 0; i < m; ++i) {
      if (static_cast<int>(rows[i].size()) != m)
        throw std::runtime_error("policy column count mismatch");
      for (int k = 0; k < m; ++k) mat.at(i, k) = entry_from_json(rows[i][k]);
    }
    policy.agents.push_back(std::move(mat));
  }
  return policy;
}

void save_policy_json(const ThresholdPolicy& policy, const std::string& path) {
  nlohmann::json j;
  int m = policy.agents.empty() ? 0 : policy.agents.front().size;
  j["M"] = m;
  j["agents"] = nlohmann::json::array();
  for (int a = 0; a < policy.num_agents(); ++a) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < m; ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int k = 0; k < m; ++k)
        row.push_back(entry_to_json(policy.theta(a, i, k)));
      rows.push_back(row);
    }
    j["agents"].push_back({{"id", a + 1}, {"theta", rows}});
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write policy file: " + path);
  out << j.dump(2) << "\n";
}

void save_policy_csv(const ThresholdPolicy& policy, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write policy file: " + path);
  int m = policy.agents.empty() ? 0 : policy.agents.front().size;
  for (int a = 0; a < policy.num_agents(); ++a) {
    if (a > 0) out << "\n";
    for (int i = 0; i < m; ++i) {
      for (int k = 0; k < m; ++k) {
        if (k > 0) out << ",";
        double th = policy.theta(a, i, k);
        if (std::isinf(th)) {
          out << "inf";
        } else {
          char buf[32];
          std::snprintf(buf, sizeof(buf), "%.9g", th);
          out << buf;
        }
      }
      out << "\n";
    }
  }
}

}  // namespace permon
