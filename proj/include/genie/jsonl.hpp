#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "genie/dataset.hpp"
#include "genie/errors.hpp"
#include "genie/sample.hpp"

namespace genie {

// Line-delimited JSON sample records. The first line is a header record
// carrying the producing config; every following line is one sample.

inline nlohmann::json sample_to_json(const LabeledSample& s, std::uint64_t seed) {
  nlohmann::json j;
  j["x"] = s.x;
  j["y"] = s.y;
  j["provenance"] = to_string(s.provenance);
  if (s.source_class)
    j["source_class"] = *s.source_class;
  else
    j["source_class"] = nullptr;
  if (s.r_used)
    j["r_used"] = *s.r_used;
  else
    j["r_used"] = nullptr;
  j["seed"] = seed;
  return j;
}

inline LabeledSample sample_from_json(const nlohmann::json& j) {
  LabeledSample s;
  s.x = j.at("x").get<std::vector<double>>();
  s.y = j.at("y").get<int>();
  s.provenance = provenance_from_string(j.at("provenance").get<std::string>());
  if (j.contains("source_class") && !j["source_class"].is_null())
    s.source_class = j["source_class"].get<int>();
  if (j.contains("r_used") && !j["r_used"].is_null()) s.r_used = j["r_used"].get<double>();
  return s;
}

inline nlohmann::json task_config_to_json(const SyntheticTaskConfig& cfg) {
  return {{"kind", to_string(cfg.kind)},
          {"n_classes", cfg.n_classes},
          {"samples_per_class", cfg.samples_per_class},
          {"class_separation", cfg.class_separation},
          {"context_modes", cfg.context_modes},
          {"context_strength", cfg.context_strength},
          {"noise_sigma", cfg.noise_sigma},
          {"seed", cfg.seed}};
}

inline SyntheticTaskConfig task_config_from_json(const nlohmann::json& j) {
  SyntheticTaskConfig cfg;
  cfg.kind = task_kind_from_string(j.at("kind").get<std::string>());
  cfg.n_classes = j.at("n_classes").get<std::size_t>();
  cfg.samples_per_class = j.at("samples_per_class").get<std::size_t>();
  cfg.class_separation = j.at("class_separation").get<double>();
  cfg.context_modes = j.at("context_modes").get<std::size_t>();
  cfg.context_strength = j.at("context_strength").get<double>();
  cfg.noise_sigma = j.at("noise_sigma").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

inline std::string samples_to_jsonl(const nlohmann::json& header_config,
                                    std::span<const LabeledSample> samples, std::uint64_t seed) {
  std::ostringstream out;
  nlohmann::json header;
  header["record"] = "header";
  header["format"] = "genie-samples";
  header["version"] = 1;
  header["config"] = header_config;
  header["seed"] = seed;
  out << header.dump() << "\n";
  for (const auto& s : samples) out << sample_to_json(s, seed).dump() << "\n";
  return out.str();
}

struct SampleFile {
  nlohmann::json header;  // null when the file had no header record
  std::vector<LabeledSample> samples;
  std::uint64_t seed = 0;
};

inline SampleFile parse_samples_jsonl(const std::string& text) {
  SampleFile out;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("samples: bad JSON line: ") + e.what());
    }
    if (first && j.contains("record") && j["record"] == "header") {
      out.header = j;
      if (j.contains("seed")) out.seed = j["seed"].get<std::uint64_t>();
      first = false;
      continue;
    }
    first = false;
    out.samples.push_back(sample_from_json(j));
  }
  return out;
}

inline void write_samples_file(const std::string& path, const nlohmann::json& header_config,
                               std::span<const LabeledSample> samples, std::uint64_t seed) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  f << samples_to_jsonl(header_config, samples, seed);
  if (!f) throw ConfigError("write failed: " + path);
}

inline SampleFile read_samples_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open: " + path);
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return parse_samples_jsonl(text);
}

}  // namespace genie
