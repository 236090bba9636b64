#include "permon/optimizer.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "permon/des.hpp"

namespace permon {
namespace {

struct EntryRef {
  int agent;
  int row;
  int col;
};

std::vector<EntryRef> finite_entries(const ThresholdPolicy& policy) {
  std::vector<EntryRef> out;
  for (std::size_t a = 0; a < policy.agents.size(); ++a) {
    const ThresholdMatrix& theta = policy.agents[a];
    for (int i = 0; i < theta.size; ++i) {
      for (int j = 0; j < theta.size; ++j) {
        if (std::isfinite(theta.at(i, j))) {
          out.push_back({static_cast<int>(a), i, j});
        }
      }
    }
  }
  return out;
}

double simulated_cost(const ProblemInstance& instance,
                      const ThresholdPolicy& policy) {
  return simulate(instance, policy).cost;
}

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || count <= 1) {
    for (int k = 0; k < count; ++k) body(k);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int k = next.fetch_add(1);
      if (k >= count) return;
      body(k);
    }
  };
  std::vector<std::thread> pool;
  const int n = std::min(threads, count);
  pool.reserve(n);
  for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

}  // namespace

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("PERMON_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

ThresholdPolicy cost_gradient(const ProblemInstance& instance,
                              const ThresholdPolicy& policy, double fd_step,
                              int threads) {
  if (!(fd_step > 0.0)) throw std::invalid_argument("fd step must be > 0");
  const auto entries = finite_entries(policy);
  const double base_cost = simulated_cost(instance, policy);

  std::vector<double> derivative(entries.size(), 0.0);
  parallel_for(
      static_cast<int>(entries.size()), resolve_threads(threads), [&](int k) {
        const EntryRef& e = entries[k];
        const double value = policy.agents[e.agent].at(e.row, e.col);

        ThresholdPolicy probe = policy;
        probe.agents[e.agent].at(e.row, e.col) = value + fd_step;
        const double up = simulated_cost(instance, probe);

        if (value - fd_step >= 0.0) {
          probe.agents[e.agent].at(e.row, e.col) = value - fd_step;
          const double down = simulated_cost(instance, probe);
          derivative[k] = (up - down) / (2.0 * fd_step);
        } else {
          // Projection feasibility ends at zero, so probe one-sided there.
          derivative[k] = (up - base_cost) / fd_step;
        }
      });

  ThresholdPolicy gradient = policy;
  for (auto& theta : gradient.agents) {
    for (double& g : theta.v) {
      if (!std::isfinite(g)) g = 0.0;  // absent edges never move
    }
  }
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const EntryRef& e = entries[k];
    gradient.agents[e.agent].at(e.row, e.col) = derivative[k];
  }
  return gradient;
}

DescentResult gradient_descent(const ProblemInstance& instance,
                               const ThresholdPolicy& start,
                               const DescentConfig& config, std::ostream* log) {
  validate_policy(instance, start);
  ThresholdPolicy current = start;

  DescentResult result;
  result.best_policy = current;
  result.best_cost = simulated_cost(instance, current);
  result.cost_trace.push_back(result.best_cost);

  for (int l = 1; l <= config.max_iters; ++l) {
    const ThresholdPolicy gradient =
        cost_gradient(instance, current, config.fd_step, config.threads);
    const double beta = config.step_rule(l);

    double max_change = 0.0;
    ThresholdPolicy next = current;
    for (std::size_t a = 0; a < next.agents.size(); ++a) {
      auto& values = next.agents[a].v;
      const auto& grads = gradient.agents[a].v;
      for (std::size_t q = 0; q < values.size(); ++q) {
        if (!std::isfinite(values[q])) continue;
        const double moved = std::max(0.0, values[q] - beta * grads[q]);
        max_change = std::max(max_change, std::abs(moved - values[q]));
        values[q] = moved;
      }
    }

    const double cost = simulated_cost(instance, next);
    result.cost_trace.push_back(cost);
    result.iterations = l;
    if (cost < result.best_cost) {
      result.best_cost = cost;
      result.best_policy = next;
    }
    if (log != nullptr) {
      std::ostringstream line;
      line << "{\"event\":\"descent\",\"iter\":" << l << ",\"cost\":" << cost
           << ",\"step\":" << beta << ",\"max_change\":" << max_change << "}";
      *log << line.str() << "\n";
    }
    current = std::move(next);
    if (max_change < config.epsilon) {
      result.converged = true;
      break;
    }
  }
  return result;
}

ThresholdPolicy perturb_policy(const ThresholdPolicy& policy, double scale,
                               std::uint64_t seed) {
  if (!(scale >= 0.0)) throw std::invalid_argument("perturbation scale");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(0.0, scale);
  ThresholdPolicy out = policy;
  for (auto& theta : out.agents) {
    for (double& value : theta.v) {
      if (std::isfinite(value)) value += noise(rng);
    }
  }
  return out;
}

}  // namespace permon
