#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "genie/confusion.hpp"
#include "genie/dataset.hpp"
#include "genie/denoiser.hpp"
#include "genie/diffusion.hpp"
#include "genie/oracle.hpp"
#include "genie/rng.hpp"
#include "genie/sample.hpp"
#include "genie/schedule.hpp"

namespace genie {

enum class SourcePolicy { random_other_class, confusion_topk };

inline std::string_view to_string(SourcePolicy p) {
  return p == SourcePolicy::random_other_class ? "random" : "confusion";
}

struct AugmentationSpec {
  Provenance method = Provenance::real;  // real = no augmentation
  double r = 0.8;
  double w = 2.0;
  std::size_t per_class_count = 0;
  SourcePolicy source_policy = SourcePolicy::random_other_class;
  std::size_t confusion_topk = 4;
  bool traditional_strong = false;
  std::uint64_t seed = 0;

  // Canonical label; also keys the generation substream so the result for a
  // spec does not depend on its position in a benchmark's spec list.
  std::string name() const {
    std::string s{to_string(method)};
    if (method == Provenance::real) return "none";
    if (method == Provenance::genie || method == Provenance::img2img)
      s += "(r=" + format_r() + ")";
    if (method == Provenance::traditional && traditional_strong) s += "(strong)";
    return s;
  }

  std::string canonical() const {
    std::string s{to_string(method)};
    s += ":r=" + std::to_string(r) + ":w=" + std::to_string(w) +
         ":count=" + std::to_string(per_class_count) + ":policy=" +
         std::string(to_string(source_policy)) + ":topk=" + std::to_string(confusion_topk) +
         ":strong=" + (traditional_strong ? "1" : "0") + ":seed=" + std::to_string(seed);
    return s;
  }

  void validate() const {
    if (method == Provenance::genie && !(r > 0.0 && r < 1.0))
      throw std::invalid_argument("augmentation spec: genie requires r in (0, 1)");
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("augmentation spec: r outside [0, 1]");
    if (!(w >= 0.0)) throw std::invalid_argument("augmentation spec: negative guidance weight");
  }

 private:
  std::string format_r() const {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", r);
    return buf;
  }
};

// Noise a source-class sample to step n = floor(r T) and denoise it
// conditioned on a different target class: a hard negative for the source.
inline LabeledSample genie_sample(const LabeledSample& source, int target, double r,
                                  const Denoiser& d, const NoiseSchedule& sched, RngStream& rng,
                                  double w, std::optional<int> target_superclass = std::nullopt) {
  if (target == source.y)
    throw std::invalid_argument("genie: target equals source class (that is img2img)");
  const std::size_t n = noising_step_count(r, sched.T);
  const std::vector<double> x_n = forward_noise(source.x, n, sched, rng);
  CondLabel cond = CondLabel::of(target);
  cond.superclass = target_superclass;
  LabeledSample out;
  out.x = reverse_from(x_n, n, cond, d, sched, rng, w);
  out.y = target;
  out.provenance = Provenance::genie;
  out.source_class = source.y;
  out.r_used = r;
  return out;
}

// Same pipeline conditioned on the sample's own class (SDEdit-style positive).
inline LabeledSample img2img_sample(const LabeledSample& sample, double r, const Denoiser& d,
                                    const NoiseSchedule& sched, RngStream& rng, double w) {
  const std::size_t n = noising_step_count(r, sched.T);
  const std::vector<double> x_n = forward_noise(sample.x, n, sched, rng);
  LabeledSample out;
  out.x = reverse_from(x_n, n, CondLabel::of(sample.y), d, sched, rng, w);
  out.y = sample.y;
  out.provenance = Provenance::img2img;
  out.source_class = sample.y;
  out.r_used = r;
  return out;
}

inline LabeledSample cond_sample_labeled(const Denoiser& d, int target,
                                         const NoiseSchedule& sched, RngStream& rng, double w) {
  LabeledSample out;
  out.x = cond_sample(d, CondLabel::of(target), sched, rng, w);
  out.y = target;
  out.provenance = Provenance::condsample;
  out.r_used = 1.0;
  return out;
}

struct MixResult {
  LabeledSample sample;
  std::vector<std::pair<int, double>> soft;  // label weights, sum to 1
};

// mixup: convex blend; cutmix: a contiguous coordinate block (2-D block on
// glyph grids) copied from b into a. Soft weights follow the realized
// fraction for cutmix.
inline MixResult mix_baselines(const LabeledSample& a, const LabeledSample& b, double lambda,
                               Provenance mode, RngStream& rng, std::size_t grid_side = 0) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw std::invalid_argument("mix_baselines: lambda outside [0, 1]");
  if (a.x.size() != b.x.size()) throw std::invalid_argument("mix_baselines: dim mismatch");
  if (mode != Provenance::cutmix && mode != Provenance::mixup)
    throw std::invalid_argument("mix_baselines: mode must be cutmix or mixup");

  MixResult out;
  out.sample.x = a.x;
  out.sample.y = a.y;
  out.sample.provenance = mode;
  out.sample.source_class = b.y;

  const std::size_t dim = a.x.size();
  double b_fraction = 1.0 - lambda;
  if (mode == Provenance::mixup) {
    for (std::size_t i = 0; i < dim; ++i)
      out.sample.x[i] = lambda * a.x[i] + (1.0 - lambda) * b.x[i];
  } else if (grid_side == 0) {
    const auto block = static_cast<std::size_t>(
        std::llround((1.0 - lambda) * static_cast<double>(dim)));
    const std::size_t start = block >= dim ? 0 : rng.uniform_below(dim - block + 1);
    for (std::size_t i = start; i < start + block; ++i) out.sample.x[i] = b.x[i];
    b_fraction = static_cast<double>(block) / static_cast<double>(dim);
  } else {
    const auto side = static_cast<std::size_t>(std::llround(
        std::sqrt(1.0 - lambda) * static_cast<double>(grid_side)));
    const std::size_t r0 = side >= grid_side ? 0 : rng.uniform_below(grid_side - side + 1);
    const std::size_t c0 = side >= grid_side ? 0 : rng.uniform_below(grid_side - side + 1);
    for (std::size_t r = r0; r < r0 + side; ++r)
      for (std::size_t c = c0; c < c0 + side; ++c)
        out.sample.x[r * grid_side + c] = b.x[r * grid_side + c];
    b_fraction = static_cast<double>(side * side) / static_cast<double>(grid_side * grid_side);
  }

  if (a.y == b.y) {
    out.soft = {{a.y, 1.0}};
  } else {
    out.soft = {{a.y, 1.0 - b_fraction}, {b.y, b_fraction}};
  }
  return out;
}

// Weak augmentation analog for vectors: small Gaussian jitter plus a
// 50% reflection of the class-signal coordinates (mirror across the first
// blob axis, horizontal flip on glyph grids). Strong adds bigger jitter and
// random coordinate dropout.
inline LabeledSample traditional_sample(const LabeledSample& src, const Dataset& ds,
                                        RngStream& rng, bool strong) {
  LabeledSample out = src;
  out.provenance = Provenance::traditional;
  out.source_class = src.y;
  const double jitter = (strong ? 0.3 : 0.1) * ds.cfg.noise_sigma;
  for (auto& v : out.x) v += jitter * rng.gaussian();
  if (rng.uniform01() < 0.5) {
    if (ds.cfg.kind == TaskKind::blobs2d) {
      out.x[1] = -out.x[1];
    } else {
      for (std::size_t r = 0; r < 8; ++r)
        for (std::size_t c = 0; c < 4; ++c) std::swap(out.x[r * 8 + c], out.x[r * 8 + 7 - c]);
    }
  }
  if (strong) {
    for (auto& v : out.x)
      if (rng.uniform01() < 0.2) v = 0.0;
  }
  return out;
}

struct AugmentedSupport {
  std::vector<LabeledSample> samples;
  std::vector<std::vector<std::pair<int, double>>> soft;  // parallel to samples

  std::vector<TrainExample> train_examples() const {
    std::vector<TrainExample> out;
    out.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) out.push_back({samples[i].x, soft[i]});
    return out;
  }
};

struct AugmentContext {
  const Denoiser* denoiser = nullptr;
  const NoiseSchedule* sched = nullptr;
  const Dataset* dataset = nullptr;              // texture facts for traditional/cutmix
  const ConfusionMatrix* confusion = nullptr;    // required for confusion_topk
};

// Adds exactly per_class_count generated samples per class while keeping the
// originals intact, so every method yields N (K + per_class_count) samples.
// Generation substreams are keyed by (class, slot) and the output order is
// fixed by (class, slot) regardless of execution schedule.
inline AugmentedSupport augment_support(std::span<const LabeledSample> support,
                                        const AugmentationSpec& spec, const AugmentContext& ctx,
                                        RngStream& rng) {
  spec.validate();
  AugmentedSupport out;
  for (const auto& s : support) {
    out.samples.push_back(s);
    out.soft.push_back({{s.y, 1.0}});
  }
  if (spec.method == Provenance::real || spec.per_class_count == 0) return out;

  int max_label = 0;
  for (const auto& s : support) max_label = std::max(max_label, s.y);
  const auto n_way = static_cast<std::size_t>(max_label) + 1;

  std::vector<std::vector<std::size_t>> by_class(n_way);
  for (std::size_t i = 0; i < support.size(); ++i)
    by_class[static_cast<std::size_t>(support[i].y)].push_back(i);

  const bool needs_model = spec.method == Provenance::genie ||
                           spec.method == Provenance::img2img ||
                           spec.method == Provenance::condsample;
  if (needs_model && (ctx.denoiser == nullptr || ctx.sched == nullptr))
    throw std::invalid_argument("augment_support: method requires a denoiser and schedule");
  if (spec.method == Provenance::genie && spec.source_policy == SourcePolicy::confusion_topk &&
      ctx.confusion == nullptr)
    throw std::invalid_argument("augment_support: confusion_topk requires a confusion matrix");
  if ((spec.method == Provenance::traditional || spec.method == Provenance::cutmix ||
       spec.method == Provenance::mixup) &&
      ctx.dataset == nullptr)
    throw std::invalid_argument("augment_support: method requires dataset facts");

  for (std::size_t c = 0; c < n_way; ++c) {
    RngStream class_rng = rng.child(c);

    // Source pool for genie: all other-class support samples. With the
    // paper's counts (per_class_count = (N-1) K) every one is used once.
    std::vector<std::size_t> other;
    for (std::size_t i = 0; i < support.size(); ++i)
      if (static_cast<std::size_t>(support[i].y) != c) other.push_back(i);
    RngStream pool_rng = class_rng.child("pool");
    pool_rng.shuffle(other);

    for (std::size_t j = 0; j < spec.per_class_count; ++j) {
      RngStream srng = class_rng.child(j + 1);
      LabeledSample gen;
      std::vector<std::pair<int, double>> soft;
      switch (spec.method) {
        case Provenance::genie: {
          std::size_t src_idx;
          if (spec.source_policy == SourcePolicy::confusion_topk) {
            const SourcePick pick =
                pick_source(static_cast<int>(c), *ctx.confusion, spec.confusion_topk, srng);
            const auto& members = by_class[static_cast<std::size_t>(pick.label)];
            src_idx = members[srng.uniform_below(members.size())];
          } else {
            src_idx = other[j % other.size()];
          }
          gen = genie_sample(support[src_idx], static_cast<int>(c), spec.r, *ctx.denoiser,
                             *ctx.sched, srng, spec.w);
          break;
        }
        case Provenance::img2img: {
          const auto& members = by_class[c];
          const auto& src = support[members[j % members.size()]];
          gen = img2img_sample(src, spec.r, *ctx.denoiser, *ctx.sched, srng, spec.w);
          break;
        }
        case Provenance::condsample:
          gen = cond_sample_labeled(*ctx.denoiser, static_cast<int>(c), *ctx.sched, srng, spec.w);
          break;
        case Provenance::traditional: {
          const auto& members = by_class[c];
          const auto& src = support[members[j % members.size()]];
          gen = traditional_sample(src, *ctx.dataset, srng, spec.traditional_strong);
          break;
        }
        case Provenance::cutmix:
        case Provenance::mixup: {
          const auto& members = by_class[c];
          const auto& a = support[members[j % members.size()]];
          const auto& b = support[other[srng.uniform_below(other.size())]];
          const double lambda = srng.uniform01();
          MixResult mix = mix_baselines(a, b, lambda, spec.method, srng,
                                        ctx.dataset->grid_side());
          gen = std::move(mix.sample);
          soft = std::move(mix.soft);
          break;
        }
        case Provenance::real:
          break;  // unreachable
      }
      if (soft.empty()) soft = {{gen.y, 1.0}};
      out.samples.push_back(std::move(gen));
      out.soft.push_back(std::move(soft));
    }
  }
  return out;
}

// Fraction of samples whose oracle argmax equals the assigned label.
inline double label_consistency(std::span<const LabeledSample> samples,
                                const OracleModel& oracle) {
  if (samples.empty()) throw std::invalid_argument("label_consistency: empty sample list");
  std::size_t hits = 0;
  for (const auto& s : samples)
    if (oracle.predict(s.x) == s.y) ++hits;
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

}  // namespace genie
