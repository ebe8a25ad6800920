#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "genie/eval.hpp"
#include "genie/version.hpp"

namespace genie {

// Locale-independent float formatting for CSV output.
inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline nlohmann::json eval_report_to_json(const EvalReport& rep) {
  nlohmann::json j;
  j["spec"] = rep.spec_name;
  j["spec_canonical"] = rep.spec_canonical;
  j["mean"] = rep.mean;
  j["ci95"] = rep.ci95;
  if (!rep.per_episode.empty()) j["per_episode"] = rep.per_episode;
  if (rep.consistency) j["consistency"] = *rep.consistency;
  if (rep.buckets) {
    j["buckets"] = {{"many", rep.buckets->many},   {"med", rep.buckets->med},
                    {"few", rep.buckets->few},     {"overall", rep.buckets->overall},
                    {"many_n", rep.buckets->many_n}, {"med_n", rep.buckets->med_n},
                    {"few_n", rep.buckets->few_n}};
  }
  // runtime_seconds is deliberately left out: reports must be byte-stable.
  return j;
}

inline nlohmann::json benchmark_to_json(const BenchmarkResult& result,
                                        const std::string& config_echo, std::uint64_t seed) {
  nlohmann::json j;
  j["version"] = std::string(kVersion);
  j["seed"] = seed;
  j["config"] = config_echo;
  j["protocol"] = {{"n_way", result.args.n_way},
                   {"k_shot", result.args.k_shot},
                   {"q_per_class", result.args.q_per_class},
                   {"episodes", result.args.episodes}};
  j["specs"] = nlohmann::json::array();
  for (const auto& rep : result.reports) j["specs"].push_back(eval_report_to_json(rep));
  j["paired_vs_first"] = nlohmann::json::array();
  for (const auto& p : result.paired)
    j["paired_vs_first"].push_back(
        {{"spec", p.spec_name}, {"mean_diff", p.mean_diff}, {"ci95", p.ci95}});
  return j;
}

inline std::string benchmark_to_csv(const BenchmarkResult& result) {
  std::string csv = "spec,episode,accuracy\n";
  for (const auto& rep : result.reports)
    for (std::size_t e = 0; e < rep.per_episode.size(); ++e)
      csv += rep.spec_name + "," + std::to_string(e) + "," + fmt_g17(rep.per_episode[e]) + "\n";
  return csv;
}

inline nlohmann::json sweep_to_json(const SweepResult& sweep, const std::string& config_echo,
                                    std::uint64_t seed) {
  nlohmann::json j;
  j["version"] = std::string(kVersion);
  j["seed"] = seed;
  j["config"] = config_echo;
  j["rows"] = nlohmann::json::array();
  for (const auto& row : sweep.rows)
    j["rows"].push_back({{"r", row.r},
                         {"mean", row.mean},
                         {"ci95", row.ci95},
                         {"consistency", row.consistency}});
  return j;
}

inline std::string sweep_to_csv(const SweepResult& sweep) {
  std::string csv = "r,mean,ci95,consistency\n";
  for (const auto& row : sweep.rows)
    csv += fmt_g17(row.r) + "," + fmt_g17(row.mean) + "," + fmt_g17(row.ci95) + "," +
           fmt_g17(row.consistency) + "\n";
  return csv;
}

inline nlohmann::json longtail_to_json(const LongTailResult& result,
                                       const std::string& config_echo, std::uint64_t seed) {
  nlohmann::json j;
  j["version"] = std::string(kVersion);
  j["seed"] = seed;
  j["config"] = config_echo;
  j["report"] = eval_report_to_json(result.report);
  j["generated_count"] = result.generated.size();
  j["source_fallback_used"] = result.source_fallback_used;
  nlohmann::json cm = nlohmann::json::array();
  for (std::size_t t = 0; t < result.confusion.n_classes; ++t) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t c = 0; c < result.confusion.n_classes; ++c)
      row.push_back(result.confusion.at(t, c));
    cm.push_back(row);
  }
  j["confusion"] = cm;
  return j;
}

inline std::string boundary_to_csv(const BoundaryReport& report) {
  std::string csv = "x,y,method,label,margin\n";
  for (const auto& p : report.points)
    csv += fmt_g17(p.px) + "," + fmt_g17(p.py) + "," + p.method + "," + std::to_string(p.label) +
           "," + fmt_g17(p.margin) + "\n";
  return csv;
}

inline nlohmann::json boundary_to_json(const BoundaryReport& report,
                                       const std::string& config_echo, std::uint64_t seed) {
  nlohmann::json j;
  j["version"] = std::string(kVersion);
  j["seed"] = seed;
  j["config"] = config_echo;
  j["projection"] = report.projection;
  j["projection_fallback"] = report.projection_fallback;
  j["methods"] = nlohmann::json::array();
  for (const auto& s : report.stats) {
    nlohmann::json m = {{"method", s.method},
                        {"count", s.count},
                        {"mean_margin", s.mean_margin},
                        {"median_margin", s.median_margin}};
    if (s.mean_context_distance) m["mean_context_distance"] = *s.mean_context_distance;
    j["methods"].push_back(m);
  }
  return j;
}

inline std::string loss_curve_csv(const std::vector<double>& raw) {
  const std::vector<double> smooth = smooth_losses(raw);
  std::string csv = "step,loss,smoothed\n";
  for (std::size_t i = 0; i < raw.size(); ++i)
    csv += std::to_string(i) + "," + fmt_g17(raw[i]) + "," + fmt_g17(smooth[i]) + "\n";
  return csv;
}

}  // namespace genie
