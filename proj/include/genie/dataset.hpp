#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "genie/rng.hpp"
#include "genie/sample.hpp"

namespace genie {

enum class TaskKind { blobs2d, glyphs8x8 };

inline std::string_view to_string(TaskKind k) {
  return k == TaskKind::blobs2d ? "blobs2d" : "glyphs8x8";
}

inline TaskKind task_kind_from_string(std::string_view s) {
  if (s == "blobs2d") return TaskKind::blobs2d;
  if (s == "glyphs8x8") return TaskKind::glyphs8x8;
  throw std::invalid_argument("unknown dataset kind: " + std::string(s));
}

struct SyntheticTaskConfig {
  TaskKind kind = TaskKind::blobs2d;
  std::size_t n_classes = 10;
  std::size_t samples_per_class = 600;
  double class_separation = 3.5;   // blob circle radius / glyph amplitude
  std::size_t context_modes = 3;
  double context_strength = 10.0;  // blob context radius / background level span
  double noise_sigma = 0.35;
  std::uint64_t seed = 1;
};

// Fixed 8x8 glyph bitmaps; '#' marks signal pixels. The strings are the
// documentation and the data.
inline const std::vector<std::array<std::string_view, 8>>& glyph_templates() {
  static const std::vector<std::array<std::string_view, 8>> kGlyphs = {
      {"........", "........", "........", "########", "########", "........", "........",
       "........"},  // hbar
      {"...##...", "...##...", "...##...", "...##...", "...##...", "...##...", "...##...",
       "...##..."},  // vbar
      {"...##...", "...##...", "...##...", "########", "########", "...##...", "...##...",
       "...##..."},  // cross
      {"##......", "###.....", ".###....", "..###...", "...###..", "....###.", ".....###",
       "......##"},  // diagonal
      {"......##", ".....###", "....###.", "...###..", "..###...", ".###....", "###.....",
       "##......"},  // anti-diagonal
      {"########", "########", "##....##", "##....##", "##....##", "##....##", "########",
       "########"},  // ring
      {"........", "........", "..####..", "..####..", "..####..", "..####..", "........",
       "........"},  // block
      {"##....##", "###..###", ".######.", "..####..", "..####..", ".######.", "###..###",
       "##....##"},  // x
      {"########", "########", "...##...", "...##...", "...##...", "...##...", "...##...",
       "...##..."},  // tee
      {"##......", "##......", "##......", "##......", "##......", "##......", "########",
       "########"},  // ell
      {"##....##", "##....##", "##....##", "##....##", "##....##", "##....##", "########",
       "########"},  // u
      {"##..##..", "##..##..", "..##..##", "..##..##", "##..##..", "##..##..", "..##..##",
       "..##..##"},  // checker
  };
  return kGlyphs;
}

// A built synthetic dataset plus the structural facts analysis code needs
// (which dims carry class signal vs shared context).
struct Dataset {
  SyntheticTaskConfig cfg;
  std::size_t data_dim = 0;
  std::vector<LabeledSample> samples;
  std::vector<std::vector<std::size_t>> by_class;        // indices into samples
  std::vector<std::vector<double>> context_centers;      // per mode, context space
  std::vector<int> context_mode_of;                      // per sample

  std::size_t n_classes() const { return cfg.n_classes; }
  std::size_t grid_side() const { return cfg.kind == TaskKind::glyphs8x8 ? 8 : 0; }

  // Dims that carry class identity (reflected by the weak-augmentation analog).
  std::size_t class_dim_count() const { return cfg.kind == TaskKind::blobs2d ? 2 : data_dim; }

  // Low-dim descriptor of the shared context: the context coordinates for
  // blobs, the mean background intensity for glyphs.
  std::vector<double> context_descriptor(std::span<const double> x) const {
    if (cfg.kind == TaskKind::blobs2d) return {x[2], x[3]};
    double mean = 0.0;
    for (double v : x) mean += v;
    return {mean / static_cast<double>(x.size())};
  }
};

inline std::vector<double> context_mode_center(const SyntheticTaskConfig& cfg, std::size_t mode) {
  if (cfg.kind == TaskKind::blobs2d) {
    const double angle =
        2.0 * std::numbers::pi * static_cast<double>(mode) / static_cast<double>(cfg.context_modes);
    return {cfg.context_strength * std::cos(angle), cfg.context_strength * std::sin(angle)};
  }
  // Background intensity levels spread over [-strength, strength].
  if (cfg.context_modes == 1) return {0.0};
  const double u = static_cast<double>(mode) / static_cast<double>(cfg.context_modes - 1);
  return {cfg.context_strength * (2.0 * u - 1.0)};
}

// Pure function of cfg: sample (c, i) always comes from substream c/i, so a
// truncated build (long-tail profile) reproduces the same leading samples.
inline Dataset build_synthetic_profile(const SyntheticTaskConfig& cfg,
                                       const std::vector<std::size_t>& per_class_counts) {
  if (cfg.n_classes < 2) throw std::invalid_argument("build_synthetic: need n_classes >= 2");
  if (!(cfg.noise_sigma > 0.0)) throw std::invalid_argument("build_synthetic: noise_sigma must be > 0");
  if (cfg.context_strength < 0.0)
    throw std::invalid_argument("build_synthetic: context_strength must be >= 0");
  if (cfg.context_modes < 1) throw std::invalid_argument("build_synthetic: context_modes must be >= 1");
  if (per_class_counts.size() != cfg.n_classes)
    throw std::invalid_argument("build_synthetic: profile length != n_classes");
  if (cfg.kind == TaskKind::glyphs8x8 && cfg.n_classes > glyph_templates().size())
    throw std::invalid_argument("build_synthetic: n_classes exceeds available glyph templates");

  Dataset ds;
  ds.cfg = cfg;
  ds.data_dim = cfg.kind == TaskKind::blobs2d ? 4 : 64;
  ds.by_class.resize(cfg.n_classes);
  for (std::size_t m = 0; m < cfg.context_modes; ++m)
    ds.context_centers.push_back(context_mode_center(cfg, m));

  RngStream root(cfg.seed);
  for (std::size_t c = 0; c < cfg.n_classes; ++c) {
    RngStream class_rng = root.child(c);
    for (std::size_t i = 0; i < per_class_counts[c]; ++i) {
      RngStream rng = class_rng.child(i);
      LabeledSample s;
      s.y = static_cast<int>(c);
      s.x.assign(ds.data_dim, 0.0);
      const auto mode = static_cast<std::size_t>(rng.uniform_below(cfg.context_modes));
      if (cfg.kind == TaskKind::blobs2d) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) /
                             static_cast<double>(cfg.n_classes);
        s.x[0] = cfg.class_separation * std::cos(angle) + cfg.noise_sigma * rng.gaussian();
        s.x[1] = cfg.class_separation * std::sin(angle) + cfg.noise_sigma * rng.gaussian();
        s.x[2] = ds.context_centers[mode][0] + cfg.noise_sigma * rng.gaussian();
        s.x[3] = ds.context_centers[mode][1] + cfg.noise_sigma * rng.gaussian();
      } else {
        const auto& glyph = glyph_templates()[c];
        const double level = ds.context_centers[mode][0];
        for (std::size_t row = 0; row < 8; ++row)
          for (std::size_t col = 0; col < 8; ++col) {
            const double pixel = glyph[row][col] == '#' ? cfg.class_separation : 0.0;
            s.x[row * 8 + col] = pixel + level + cfg.noise_sigma * rng.gaussian();
          }
      }
      ds.context_mode_of.push_back(static_cast<int>(mode));
      ds.by_class[c].push_back(ds.samples.size());
      ds.samples.push_back(std::move(s));
    }
  }
  return ds;
}

inline Dataset build_synthetic(const SyntheticTaskConfig& cfg) {
  return build_synthetic_profile(cfg,
                                 std::vector<std::size_t>(cfg.n_classes, cfg.samples_per_class));
}

// One few-shot task: N x K support, N x Q query, labels remapped to 0..N-1.
struct Episode {
  std::vector<LabeledSample> support;
  std::vector<LabeledSample> query;
  std::vector<int> class_remap;             // episode label -> original class
  std::vector<std::size_t> support_src;     // original sample indices
  std::vector<std::size_t> query_src;
  std::size_t n_way = 0, k_shot = 0, q_per_class = 0;
};

inline Episode sample_episode(const Dataset& ds, std::size_t N, std::size_t K, std::size_t Q,
                              RngStream& rng) {
  if (N > ds.n_classes()) throw std::invalid_argument("sample_episode: not enough classes");
  for (const auto& members : ds.by_class)
    if (members.size() < K + Q)
      throw std::invalid_argument("sample_episode: class too small for K+Q");

  Episode ep;
  ep.n_way = N;
  ep.k_shot = K;
  ep.q_per_class = Q;
  const std::vector<std::size_t> classes = rng.sample_without_replacement(ds.n_classes(), N);
  for (std::size_t e = 0; e < N; ++e) {
    const std::size_t c = classes[e];
    ep.class_remap.push_back(static_cast<int>(c));
    const auto picks = rng.sample_without_replacement(ds.by_class[c].size(), K + Q);
    for (std::size_t j = 0; j < K + Q; ++j) {
      const std::size_t src = ds.by_class[c][picks[j]];
      LabeledSample s = ds.samples[src];
      s.y = static_cast<int>(e);
      if (j < K) {
        ep.support.push_back(std::move(s));
        ep.support_src.push_back(src);
      } else {
        ep.query.push_back(std::move(s));
        ep.query_src.push_back(src);
      }
    }
  }
  return ep;
}

enum class Bucket { many, med, few };

inline std::string_view to_string(Bucket b) {
  switch (b) {
    case Bucket::many: return "many";
    case Bucket::med: return "med";
    case Bucket::few: return "few";
  }
  return "med";
}

// Imbalanced dataset with the paper-style class buckets:
// few < few_below <= med <= many_above < many.
struct LongTailDataset {
  Dataset train;
  std::vector<std::size_t> profile;
  std::vector<Bucket> bucket;  // per class

  std::vector<int> classes_in(Bucket b) const {
    std::vector<int> out;
    for (std::size_t c = 0; c < bucket.size(); ++c)
      if (bucket[c] == b) out.push_back(static_cast<int>(c));
    return out;
  }
};

inline LongTailDataset build_longtail(const std::vector<std::size_t>& profile,
                                      const SyntheticTaskConfig& cfg, std::size_t few_below = 20,
                                      std::size_t many_above = 100) {
  for (auto count : profile)
    if (count < 1) throw std::invalid_argument("build_longtail: counts must be >= 1");
  LongTailDataset lt;
  lt.train = build_synthetic_profile(cfg, profile);
  lt.profile = profile;
  for (auto count : profile) {
    if (count < few_below)
      lt.bucket.push_back(Bucket::few);
    else if (count > many_above)
      lt.bucket.push_back(Bucket::many);
    else
      lt.bucket.push_back(Bucket::med);
  }
  return lt;
}

// Default desk profile: 10 classes, geometric decay 200 -> 5.
inline std::vector<std::size_t> default_longtail_profile(std::size_t n_classes = 10,
                                                         std::size_t max_count = 200,
                                                         std::size_t min_count = 5) {
  std::vector<std::size_t> profile;
  const double ratio = static_cast<double>(min_count) / static_cast<double>(max_count);
  for (std::size_t c = 0; c < n_classes; ++c) {
    const double f = n_classes == 1 ? 0.0 : static_cast<double>(c) / static_cast<double>(n_classes - 1);
    profile.push_back(static_cast<std::size_t>(
        std::llround(static_cast<double>(max_count) * std::pow(ratio, f))));
  }
  return profile;
}

}  // namespace genie
