#include "permon/cycle_builder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "permon/cycle_analysis.hpp"

namespace permon {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void log_line(std::ostream* log, const std::string& line) {
  if (log != nullptr) *log << line << "\n";
}

std::string kind_name(ExpansionKind kind) {
  switch (kind) {
    case ExpansionKind::kEdgeSplit: return "edge_split";
    case ExpansionKind::kBranchInsert: return "branch_insert";
    case ExpansionKind::kBracketReplace: return "bracket_replace";
  }
  return "?";
}

// Expansion gain: newly covered target stops paying the neglect penalty, at
// the price of whatever the steady-state cost change of the tour is.
double expansion_gain(const ProblemInstance& instance, int target,
                      double base_cost, const TargetCycle& expanded,
                      double horizon) {
  const double expanded_cost = cycle_cost_or_inf(instance, expanded);
  if (std::isinf(expanded_cost)) return -kInf;
  if (std::isinf(base_cost)) return kInf;
  return neglected_target_cost(instance.target(target), horizon) + base_cost -
         expanded_cost;
}

// Positions strictly between `from` and `to` walking forward cyclically.
std::vector<int> between_positions(int from, int to, int length) {
  std::vector<int> out;
  for (int p = (from + 1) % length; p != to; p = (p + 1) % length) {
    out.push_back(p);
  }
  return out;
}

// A bracket may only be replaced when every copy inside it is redundant:
// the bracketed targets must all keep at least one copy outside.
bool bracket_removable(const TargetCycle& cycle, const std::vector<int>& bracket) {
  std::map<int, int> removed;
  for (int p : bracket) removed[cycle.visits()[p]]++;
  for (const auto& [target, count] : removed) {
    if (cycle.multiplicity(target) <= count) return false;
  }
  return true;
}

struct KindBest {
  bool found = false;
  ExpansionCandidate candidate;
};

void offer(KindBest* best, ExpansionCandidate cand) {
  // Scan order is (target, site_a, site_b) ascending, so strict > keeps the
  // lexicographically smallest maximizer.
  if (!best->found || cand.gain > best->candidate.gain) {
    best->found = true;
    best->candidate = std::move(cand);
  }
}

KindBest best_of_kind(const ProblemInstance& instance, const TargetCycle& cycle,
                      ExpansionKind kind, double base_cost, double horizon,
                      const std::vector<int>& uncovered, std::ostream* log) {
  KindBest best;
  const auto& visits = cycle.visits();
  const int length = cycle.length();
  for (int target : uncovered) {
    if (kind == ExpansionKind::kEdgeSplit) {
      for (int p = 0; p < length; ++p) {
        const int from = visits[p];
        const int to = visits[(p + 1) % length];
        if (!instance.has_edge(from, target) || !instance.has_edge(target, to))
          continue;
        TargetCycle expanded = apply_edge_split(instance, cycle, p, target);
        const double gain =
            expansion_gain(instance, target, base_cost, expanded, horizon);
        offer(&best, {kind, target, p, -1, gain, std::move(expanded)});
      }
    } else if (kind == ExpansionKind::kBranchInsert) {
      for (int p = 0; p < length; ++p) {
        const int anchor = visits[p];
        if (!instance.has_edge(anchor, target) ||
            !instance.has_edge(target, anchor))
          continue;
        TargetCycle expanded = apply_branch_insert(instance, cycle, p, target);
        const double gain =
            expansion_gain(instance, target, base_cost, expanded, horizon);
        offer(&best, {kind, target, p, -1, gain, std::move(expanded)});
      }
    } else {
      if (length < 3) continue;
      for (int pa = 0; pa < length; ++pa) {
        for (int pb = 0; pb < length; ++pb) {
          if (pa == pb || (pa + 1) % length == pb) continue;
          if (!instance.has_edge(visits[pa], target) ||
              !instance.has_edge(target, visits[pb]))
            continue;
          const auto bracket = between_positions(pa, pb, length);
          if (!bracket_removable(cycle, bracket)) continue;
          TargetCycle expanded =
              apply_bracket_replace(instance, cycle, pa, pb, target);
          const double gain =
              expansion_gain(instance, target, base_cost, expanded, horizon);
          offer(&best, {kind, target, pa, pb, gain, std::move(expanded)});
        }
      }
    }
  }
  if (best.found && log != nullptr) {
    std::ostringstream line;
    line << "{\"event\":\"candidate\",\"kind\":\"" << kind_name(kind)
         << "\",\"target\":" << best.candidate.target + 1
         << ",\"site\":" << best.candidate.site_a
         << ",\"gain\":" << best.candidate.gain << "}";
    log_line(log, line.str());
  }
  return best;
}

std::vector<int> uncovered_targets(const ProblemInstance& instance,
                                   const TargetCycle& cycle) {
  std::vector<int> out;
  for (int i = 0; i < instance.num_targets(); ++i) {
    if (!cycle.contains(i)) out.push_back(i);
  }
  return out;
}

}  // namespace

TargetCycle apply_edge_split(const ProblemInstance& instance,
                             const TargetCycle& cycle, int site, int target) {
  const auto& visits = cycle.visits();
  const int length = cycle.length();
  if (site < 0 || site >= length) throw std::out_of_range("split site");
  const int from = visits[site];
  const int to = visits[(site + 1) % length];
  if (!instance.has_edge(from, target) || !instance.has_edge(target, to)) {
    throw std::invalid_argument("edge split requires both replacement edges");
  }
  std::vector<int> next(visits.begin(), visits.end());
  next.insert(next.begin() + site + 1, target);
  return TargetCycle(next);
}

TargetCycle apply_branch_insert(const ProblemInstance& instance,
                                const TargetCycle& cycle, int site, int target) {
  const auto& visits = cycle.visits();
  const int length = cycle.length();
  if (site < 0 || site >= length) throw std::out_of_range("branch site");
  const int anchor = visits[site];
  if (!instance.has_edge(anchor, target) || !instance.has_edge(target, anchor)) {
    throw std::invalid_argument("branch insert needs the anchor edge both ways");
  }
  std::vector<int> next(visits.begin(), visits.end());
  next.insert(next.begin() + site + 1, {target, anchor});
  return TargetCycle(next);
}

TargetCycle apply_bracket_replace(const ProblemInstance& instance,
                                  const TargetCycle& cycle, int site_a,
                                  int site_b, int target) {
  const auto& visits = cycle.visits();
  const int length = cycle.length();
  if (site_a < 0 || site_a >= length || site_b < 0 || site_b >= length ||
      site_a == site_b || (site_a + 1) % length == site_b) {
    throw std::out_of_range("bracket endpoints");
  }
  if (!instance.has_edge(visits[site_a], target) ||
      !instance.has_edge(target, visits[site_b])) {
    throw std::invalid_argument("bracket replacement edges missing");
  }
  const auto bracket = between_positions(site_a, site_b, length);
  if (!bracket_removable(cycle, bracket)) {
    throw std::invalid_argument("bracket holds the only copy of a target");
  }
  // Rebuild from site_b around to site_a, then the new visit closes the loop.
  std::vector<int> next;
  for (int p = site_b;; p = (p + 1) % length) {
    next.push_back(visits[p]);
    if (p == site_a) break;
  }
  next.push_back(target);
  return TargetCycle(next);
}

TargetCycle best_two_target_cycle(const ProblemInstance& instance) {
  bool found = false;
  double best_cost = kInf;
  std::pair<int, int> best_pair{-1, -1};
  for (int j = 0; j < instance.num_targets(); ++j) {
    for (int l = j + 1; l < instance.num_targets(); ++l) {
      if (!instance.has_edge(j, l) || !instance.has_edge(l, j)) continue;
      const double cost = cycle_cost_or_inf(instance, TargetCycle({j, l}));
      if (!found || cost < best_cost) {
        found = true;
        best_cost = cost;
        best_pair = {j, l};
      }
    }
  }
  if (!found) throw std::runtime_error("no mutually connected target pair");
  return TargetCycle({best_pair.first, best_pair.second});
}

std::optional<ExpansionCandidate> best_expansion(
    const ProblemInstance& instance, const TargetCycle& cycle,
    const std::vector<ExpansionKind>& kinds, double horizon,
    std::ostream* log) {
  const auto uncovered = uncovered_targets(instance, cycle);
  if (uncovered.empty()) return std::nullopt;
  const double base_cost = cycle_cost_or_inf(instance, cycle);

  // Evaluate each move family separately, then prefer the cheaper-to-apply
  // family whenever it ties the overall best gain.
  std::vector<KindBest> bests;
  bests.reserve(kinds.size());
  for (ExpansionKind kind : kinds) {
    bests.push_back(
        best_of_kind(instance, cycle, kind, base_cost, horizon, uncovered, log));
  }
  double top = -kInf;
  for (const auto& b : bests) {
    if (b.found) top = std::max(top, b.candidate.gain);
  }
  for (const auto& b : bests) {
    if (b.found && b.candidate.gain == top) return b.candidate;
  }
  return std::nullopt;
}

GreedyResult greedy_unconstrained(const ProblemInstance& instance,
                                  std::ostream* log) {
  GreedyResult result{best_two_target_cycle(instance), false};
  while (static_cast<int>(result.cycle.coverage().size()) <
         instance.num_targets()) {
    auto cand = best_expansion(instance, result.cycle,
                               {ExpansionKind::kEdgeSplit}, instance.horizon(),
                               log);
    if (!cand.has_value()) {
      result.halted = true;
      log_line(log, "{\"event\":\"halt\",\"reason\":\"no edge split available\"}");
      break;
    }
    if (cand->gain < 0.0) break;
    std::ostringstream line;
    line << "{\"event\":\"accept\",\"kind\":\"edge_split\",\"target\":"
         << cand->target + 1 << ",\"gain\":" << cand->gain << "}";
    log_line(log, line.str());
    result.cycle = std::move(cand->result);
  }
  return result;
}

GreedyResult greedy_constrained(const ProblemInstance& instance,
                                std::ostream* log) {
  GreedyResult result{best_two_target_cycle(instance), false};
  const std::vector<ExpansionKind> kinds = {ExpansionKind::kEdgeSplit,
                                            ExpansionKind::kBranchInsert,
                                            ExpansionKind::kBracketReplace};
  while (static_cast<int>(result.cycle.coverage().size()) <
         instance.num_targets()) {
    auto cand =
        best_expansion(instance, result.cycle, kinds, instance.horizon(), log);
    if (!cand.has_value() || cand->gain <= 0.0) break;
    std::ostringstream line;
    line << "{\"event\":\"accept\",\"kind\":\"" << kind_name(cand->kind)
         << "\",\"target\":" << cand->target + 1 << ",\"gain\":" << cand->gain
         << "}";
    log_line(log, line.str());
    result.cycle = std::move(cand->result);
  }
  result.halted = static_cast<int>(result.cycle.coverage().size()) <
                  instance.num_targets();
  return result;
}

namespace {

// Local-search plumbing. Constrained tours treat two copies of the same
// target as linked by a zero-length virtual edge, so moves may join them
// even when the graph has no such arc; a later merge pass collapses the
// seam into one copy.
bool refine_edge_ok(const ProblemInstance& instance, bool allow_virtual,
                    int from, int to) {
  if (from == to) return allow_virtual;
  return instance.has_edge(from, to);
}

bool cycle_edges_ok(const ProblemInstance& instance, bool allow_virtual,
                    const std::vector<int>& visits) {
  const int n = static_cast<int>(visits.size());
  for (int p = 0; p < n; ++p) {
    if (!refine_edge_ok(instance, allow_virtual, visits[p], visits[(p + 1) % n]))
      return false;
  }
  return true;
}

// Collapse adjacent copies of the same target (including across the wrap).
std::vector<int> merge_adjacent_copies(std::vector<int> visits) {
  bool changed = true;
  while (changed && visits.size() > 1) {
    changed = false;
    std::vector<int> merged;
    merged.reserve(visits.size());
    for (int v : visits) {
      if (!merged.empty() && merged.back() == v) {
        changed = true;
        continue;
      }
      merged.push_back(v);
    }
    while (merged.size() > 1 && merged.front() == merged.back()) {
      merged.pop_back();
      changed = true;
    }
    visits = std::move(merged);
  }
  return visits;
}

std::vector<std::vector<int>> two_opt_moves(const ProblemInstance& instance,
                                            bool allow_virtual,
                                            const std::vector<int>& visits) {
  std::vector<std::vector<int>> out;
  const int n = static_cast<int>(visits.size());
  if (n < 4) return out;
  for (int a = 0; a < n - 1; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (a == 0 && b == n - 1) continue;  // same pair of cut edges
      const int bn = (b + 1) % n;
      if (!refine_edge_ok(instance, allow_virtual, visits[a], visits[b]) ||
          !refine_edge_ok(instance, allow_virtual, visits[a + 1], visits[bn]))
        continue;
      std::vector<int> cand(visits);
      std::reverse(cand.begin() + a + 1, cand.begin() + b + 1);
      // Reversal flips every interior arc, so each must exist backwards.
      bool ok = true;
      for (int p = a + 1; p < b && ok; ++p) {
        ok = refine_edge_ok(instance, allow_virtual, cand[p], cand[p + 1]);
      }
      if (ok) out.push_back(std::move(cand));
    }
  }
  return out;
}

std::vector<std::vector<int>> three_opt_moves(const ProblemInstance& instance,
                                              bool allow_virtual,
                                              const std::vector<int>& visits) {
  std::vector<std::vector<int>> out;
  const int n = static_cast<int>(visits.size());
  if (n < 5) return out;
  for (int a = 0; a < n - 2; ++a) {
    for (int b = a + 1; b < n - 1; ++b) {
      for (int c = b + 1; c < n; ++c) {
        if (a == 0 && c == n - 1) continue;
        const int cn = (c + 1) % n;
        // Exchange the two middle segments, keeping every arc forward.
        if (!refine_edge_ok(instance, allow_virtual, visits[a], visits[b + 1]) ||
            !refine_edge_ok(instance, allow_virtual, visits[c], visits[a + 1]) ||
            !refine_edge_ok(instance, allow_virtual, visits[b], visits[cn]))
          continue;
        std::vector<int> cand;
        cand.reserve(n);
        cand.insert(cand.end(), visits.begin(), visits.begin() + a + 1);
        cand.insert(cand.end(), visits.begin() + b + 1, visits.begin() + c + 1);
        cand.insert(cand.end(), visits.begin() + a + 1, visits.begin() + b + 1);
        cand.insert(cand.end(), visits.begin() + c + 1, visits.end());
        out.push_back(std::move(cand));
      }
    }
  }
  return out;
}

// Every way of deleting one all-redundant bracket whose endpoints are
// directly connected.
std::vector<std::vector<int>> bracket_removals(const ProblemInstance& instance,
                                               const std::vector<int>& visits) {
  std::vector<std::vector<int>> out;
  const int n = static_cast<int>(visits.size());
  if (n < 3) return out;
  TargetCycle cycle(visits);
  for (int pa = 0; pa < n; ++pa) {
    for (int pb = 0; pb < n; ++pb) {
      if (pa == pb || (pa + 1) % n == pb) continue;
      if (!refine_edge_ok(instance, true, visits[pa], visits[pb])) continue;
      const auto bracket = between_positions(pa, pb, n);
      if (static_cast<int>(bracket.size()) >= n - 1) continue;
      if (!bracket_removable(cycle, bracket)) continue;
      std::vector<int> cand;
      for (int p = pb;; p = (p + 1) % n) {
        cand.push_back(visits[p]);
        if (p == pa) break;
      }
      out.push_back(std::move(cand));
    }
  }
  return out;
}

double memo_cost(const ProblemInstance& instance,
                 std::map<std::string, double>* memo,
                 const TargetCycle& cycle) {
  std::string key = cycle.canonical_signature();
  auto it = memo->find(key);
  if (it != memo->end()) return it->second;
  const double cost = cycle_cost_or_inf(instance, cycle);
  memo->emplace(std::move(key), cost);
  return cost;
}

}  // namespace

TargetCycle refine(const ProblemInstance& instance, const TargetCycle& cycle,
                   std::ostream* log) {
  if (cycle.length() <= 2) return cycle;
  const bool constrained = !cycle.is_unconstrained();

  std::map<std::string, double> memo;
  std::set<std::string> visited;
  TargetCycle current = cycle;
  visited.insert(current.canonical_signature());
  double current_cost = memo_cost(instance, &memo, current);

  for (;;) {
    std::vector<std::vector<int>> raw;
    raw.push_back(current.visits());  // identity, so cleanups alone can act
    auto two = two_opt_moves(instance, constrained, current.visits());
    auto three = three_opt_moves(instance, constrained, current.visits());
    raw.insert(raw.end(), std::make_move_iterator(two.begin()),
               std::make_move_iterator(two.end()));
    raw.insert(raw.end(), std::make_move_iterator(three.begin()),
               std::make_move_iterator(three.end()));

    bool found = false;
    double best_cost = kInf;
    TargetCycle best = current;
    auto offer_visits = [&](const std::vector<int>& visits) {
      if (visits.size() < 1) return;
      if (!cycle_edges_ok(instance, false, visits)) return;
      TargetCycle cand(visits);
      if (visited.count(cand.canonical_signature())) return;
      const double cost = memo_cost(instance, &memo, cand);
      if (cost < best_cost) {
        found = true;
        best_cost = cost;
        best = std::move(cand);
      }
    };

    for (const auto& move : raw) {
      if (constrained) {
        const auto merged = merge_adjacent_copies(move);
        offer_visits(merged);
        for (const auto& shrunk : bracket_removals(instance, merged)) {
          offer_visits(merge_adjacent_copies(shrunk));
        }
      } else {
        offer_visits(move);
      }
    }

    const bool accept = found && (constrained ? best_cost <= current_cost
                                              : best_cost < current_cost);
    if (!accept) break;
    current = std::move(best);
    current_cost = best_cost;
    visited.insert(current.canonical_signature());
    if (log != nullptr) {
      std::ostringstream line;
      line << "{\"event\":\"refine_accept\",\"cost\":" << current_cost
           << ",\"length\":" << current.length() << "}";
      log_line(log, line.str());
    }
  }
  return current;
}

std::optional<TargetCycle> expand_to_include(const ProblemInstance& instance,
                                             const TargetCycle& cycle,
                                             int target) {
  if (cycle.multiplicity(target) > 0) return cycle;
  if (cycle.length() == 1) {
    // A parked tour can only grow into a two-target shuttle.
    const int anchor = cycle.visits()[0];
    if (instance.has_edge(anchor, target) && instance.has_edge(target, anchor)) {
      return TargetCycle({std::min(anchor, target), std::max(anchor, target)});
    }
    return std::nullopt;
  }
  const double base_cost = cycle_cost_or_inf(instance, cycle);
  const std::vector<ExpansionKind> kinds = {ExpansionKind::kEdgeSplit,
                                            ExpansionKind::kBranchInsert,
                                            ExpansionKind::kBracketReplace};
  std::vector<KindBest> bests;
  for (ExpansionKind kind : kinds) {
    bests.push_back(best_of_kind(instance, cycle, kind, base_cost,
                                 instance.horizon(), {target}, nullptr));
  }
  double top = -kInf;
  for (const auto& b : bests) {
    if (b.found) top = std::max(top, b.candidate.gain);
  }
  if (std::isinf(top) && top < 0) return std::nullopt;
  for (const auto& b : bests) {
    if (b.found && b.candidate.gain == top) {
      return refine(instance, b.candidate.result, nullptr);
    }
  }
  return std::nullopt;
}

}  // namespace permon
