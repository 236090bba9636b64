#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "permon/des.hpp"
#include "permon/pipeline.hpp"

namespace permon {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt(double value, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, value);
  return buf;
}

json cost_or_null(double value) {
  return std::isfinite(value) ? json(value) : json(nullptr);
}

std::vector<int> one_based(const std::vector<int>& ids) {
  std::vector<int> out;
  out.reserve(ids.size());
  for (int v : ids) out.push_back(v + 1);
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

json partition_json(const RunReport& report) {
  json p;
  p["clusters"] = json::array();
  p["cycles"] = json::array();
  p["neglected"] = json::array();
  p["costs"] = json::array();
  for (std::size_t c = 0; c < report.partition.clusters.size(); ++c) {
    p["clusters"].push_back(one_based(report.partition.clusters[c]));
    p["cycles"].push_back(one_based(report.partition.cycles[c].visits()));
    p["neglected"].push_back(one_based(report.partition.neglected[c]));
    p["costs"].push_back(cost_or_null(report.partition.costs[c]));
  }
  p["total_cost"] = cost_or_null(report.partition.total_cost);
  return p;
}

std::string cost_trace_csv(const std::vector<double>& trace) {
  std::ostringstream out;
  out << "iteration,cost\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out << i << "," << fmt(trace[i], "%.9g") << "\n";
  }
  return out.str();
}

std::string cost_trace_svg(const std::vector<double>& trace) {
  const double width = 720.0, height = 480.0;
  const double left = 64.0, right = 24.0, top = 24.0, bottom = 48.0;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\""
      << left + plot_w << "\" y2=\"" << top + plot_h
      << "\" stroke=\"#444\" stroke-width=\"1\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
      << "\" y2=\"" << top + plot_h
      << "\" stroke=\"#444\" stroke-width=\"1\"/>\n";

  std::vector<double> finite;
  for (double v : trace) {
    if (std::isfinite(v)) finite.push_back(v);
  }
  if (finite.empty()) {
    svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << top + plot_h / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"14\" fill=\"#888\">no data</text>\n";
    svg << "</svg>\n";
    return svg.str();
  }

  double lo = *std::min_element(finite.begin(), finite.end());
  double hi = *std::max_element(finite.begin(), finite.end());
  if (hi - lo < 1e-12) {
    hi = lo + 1.0;
    lo -= 1.0;
  }
  const double span_x = trace.size() > 1 ? double(trace.size() - 1) : 1.0;
  auto px = [&](std::size_t i) { return left + plot_w * (double(i) / span_x); };
  auto py = [&](double v) { return top + plot_h * (1.0 - (v - lo) / (hi - lo)); };

  svg << "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1.5\" "
         "points=\"";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (!std::isfinite(trace[i])) continue;
    svg << fmt(px(i), "%.2f") << "," << fmt(py(trace[i]), "%.2f") << " ";
  }
  svg << "\"/>\n";
  svg << "<text x=\"" << left - 6 << "\" y=\"" << top + 10
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" "
         "fill=\"#444\">"
      << fmt(hi) << "</text>\n";
  svg << "<text x=\"" << left - 6 << "\" y=\"" << top + plot_h
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" "
         "fill=\"#444\">"
      << fmt(lo) << "</text>\n";
  svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 14
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\" fill=\"#444\">iteration (0.."
      << trace.size() - 1 << ")</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

std::string topology_svg(const RunReport& report,
                         const ProblemInstance& instance) {
  const double width = 680.0, height = 680.0, margin = 40.0;
  const int m = instance.num_targets();

  // Use stored coordinates when they spread out; otherwise place the
  // targets on a circle so purely combinatorial instances still render.
  std::vector<double> xs(m), ys(m);
  double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
  for (int i = 0; i < m; ++i) {
    xs[i] = instance.target(i).x;
    ys[i] = instance.target(i).y;
    min_x = std::min(min_x, xs[i]);
    max_x = std::max(max_x, xs[i]);
    min_y = std::min(min_y, ys[i]);
    max_y = std::max(max_y, ys[i]);
  }
  if (max_x - min_x < 1e-9 && max_y - min_y < 1e-9) {
    for (int i = 0; i < m; ++i) {
      const double angle = 2.0 * M_PI * i / std::max(m, 1);
      xs[i] = std::cos(angle);
      ys[i] = std::sin(angle);
    }
    min_x = min_y = -1.0;
    max_x = max_y = 1.0;
  }
  const double span = std::max({max_x - min_x, max_y - min_y, 1e-9});
  auto px = [&](double x) {
    return margin + (width - 2 * margin) * (x - min_x) / span;
  };
  auto py = [&](double y) {
    return height - margin - (height - 2 * margin) * (y - min_y) / span;
  };

  std::vector<int> cluster_of(m, -1);
  for (std::size_t c = 0; c < report.partition.clusters.size(); ++c) {
    for (int t : report.partition.clusters[c]) cluster_of[t] = int(c);
  }
  static const char* kPalette[] = {"#4e79a7", "#f28e2b", "#59a45c", "#b07aa1",
                                   "#76b7b2", "#edc948", "#9c755f", "#bab0ac"};
  constexpr int kPaletteSize = 8;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";

  for (const Edge& e : instance.edges()) {
    svg << "<line x1=\"" << fmt(px(xs[e.from]), "%.2f") << "\" y1=\""
        << fmt(py(ys[e.from]), "%.2f") << "\" x2=\""
        << fmt(px(xs[e.to]), "%.2f") << "\" y2=\"" << fmt(py(ys[e.to]), "%.2f")
        << "\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
  }

  for (const TargetCycle& cycle : report.partition.cycles) {
    if (cycle.length() < 2) continue;
    svg << "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"2.2\" "
           "points=\"";
    for (int p = 0; p <= cycle.length(); ++p) {
      const int t = cycle.visits()[p % cycle.length()];
      svg << fmt(px(xs[t]), "%.2f") << "," << fmt(py(ys[t]), "%.2f") << " ";
    }
    svg << "\"/>\n";
  }

  for (int i = 0; i < m; ++i) {
    const char* fill =
        cluster_of[i] >= 0 ? kPalette[cluster_of[i] % kPaletteSize] : "#6699cc";
    svg << "<circle cx=\"" << fmt(px(xs[i]), "%.2f") << "\" cy=\""
        << fmt(py(ys[i]), "%.2f") << "\" r=\"7\" fill=\"" << fill
        << "\" stroke=\"#333\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << fmt(px(xs[i]) + 9, "%.2f") << "\" y=\""
        << fmt(py(ys[i]) - 9, "%.2f")
        << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#222\">"
        << i + 1 << "</text>\n";
  }

  for (int a = 0; a < instance.num_agents(); ++a) {
    const int s = instance.start_targets()[a];
    svg << "<circle cx=\"" << fmt(px(xs[s]), "%.2f") << "\" cy=\""
        << fmt(py(ys[s]), "%.2f")
        << "\" r=\"11\" fill=\"none\" stroke=\"#111\" stroke-width=\"1.8\" "
           "stroke-dasharray=\"3 2\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

void render_outputs(const RunReport& report, const ProblemInstance& instance,
                    const std::string& out_dir) {
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output dir " + out_dir);

  json summary;
  summary["mode"] = report.mode;
  summary["seed"] = report.seed;
  summary["num_targets"] = report.num_targets;
  summary["num_agents"] = report.num_agents;
  summary["sigma"] = report.sigma_used;
  const double improvement =
      (std::isfinite(report.initial_cost) && report.initial_cost > 0.0)
          ? 100.0 * (report.initial_cost - report.final_cost) /
                report.initial_cost
          : 0.0;
  summary["costs"] = {{"initial", cost_or_null(report.initial_cost)},
                      {"final", cost_or_null(report.final_cost)},
                      {"improvement_pct", improvement}};
  summary["descent"] = {{"converged", report.descent_converged},
                        {"iterations", report.descent_iterations},
                        {"trace_points", report.cost_trace.size()}};
  summary["partition"] = partition_json(report);
  json assignment;
  assignment["cycle_of_agent"] = report.cycle_of_agent;
  assignment["approach_paths"] = json::array();
  for (const auto& path : report.approach_paths) {
    assignment["approach_paths"].push_back(one_based(path));
  }
  summary["assignment"] = assignment;
  summary["stage_ms"] = report.stage_ms;
  write_file(dir / "report.json", summary.dump(2) + "\n");

  write_file(dir / "partition.json", partition_json(report).dump(2) + "\n");
  write_file(dir / "cost_trace.csv", cost_trace_csv(report.cost_trace));
  write_file(dir / "cost_trace.svg", cost_trace_svg(report.cost_trace));
  write_file(dir / "topology.svg", topology_svg(report, instance));

  if (!report.initial_policy.agents.empty()) {
    save_policy_json(report.initial_policy, (dir / "initial_policy.json").string());
  }
  if (!report.final_policy.agents.empty()) {
    save_policy_json(report.final_policy, (dir / "final_policy.json").string());
    save_policy_csv(report.final_policy, (dir / "final_policy.csv").string());
  }

  if (report.mode == "simulate" && !report.final_policy.agents.empty()) {
    const SimulationTrace trace = simulate(instance, report.final_policy);
    save_trace_csv(trace, instance, (dir / "trace.csv").string());
    save_itineraries_csv(trace, (dir / "itineraries.csv").string());
  }
}

}  // namespace permon
