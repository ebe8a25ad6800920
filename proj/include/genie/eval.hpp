#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "genie/augment.hpp"
#include "genie/confusion.hpp"
#include "genie/dataset.hpp"
#include "genie/denoiser.hpp"
#include "genie/diffusion.hpp"
#include "genie/errors.hpp"
#include "genie/logreg.hpp"
#include "genie/oracle.hpp"
#include "genie/parallel.hpp"
#include "genie/rng.hpp"

namespace genie {

inline double mean_of(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

inline double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

// 95% CI half-width under the normal approximation, the paper's convention.
inline double ci95_halfwidth(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  return 1.96 * sample_std(v) / std::sqrt(static_cast<double>(v.size()));
}

struct BucketReport {
  double many = 0.0, med = 0.0, few = 0.0, overall = 0.0;
  std::size_t many_n = 0, med_n = 0, few_n = 0;
};

struct EvalReport {
  std::string spec_name;
  std::string spec_canonical;
  std::vector<double> per_episode;
  double mean = 0.0;
  double ci95 = 0.0;
  std::optional<BucketReport> buckets;      // long-tail runs only
  std::optional<double> consistency;        // specs that generate samples
  double runtime_seconds = 0.0;             // console diagnostics; never serialized
};

struct PairedDiff {
  std::string spec_name;
  double mean_diff = 0.0;
  double ci95 = 0.0;
};

// Hyperparameters of the per-episode head, fixed across specs for fairness.
struct HeadConfig {
  double l2 = 1e-3;
  std::size_t steps = 500;
  double lr = 0.5;
};

struct EpisodeEval {
  double accuracy = 0.0;
  std::vector<LabeledSample> generated;  // labels mapped back to original classes
  std::size_t augmented_size = 0;
};

// Builds the support confusion matrix used by the confusion_topk policy in
// episodic mode: a head fit on the raw support, scored on the support itself.
inline ConfusionMatrix episode_confusion(const Episode& ep, const HeadConfig& head_cfg) {
  const LogRegHead head = fit_logreg(std::span<const LabeledSample>(ep.support), ep.n_way,
                                     head_cfg.l2, head_cfg.steps, head_cfg.lr);
  ConfusionMatrix cm(ep.n_way);
  for (const auto& s : ep.support) cm.record(s.y, logreg_predict(head, s.x));
  return cm;
}

inline EpisodeEval eval_episode(const Episode& ep, const AugmentationSpec& spec,
                                const Denoiser* denoiser, const NoiseSchedule* sched,
                                const Dataset* dataset, RngStream gen_rng,
                                const HeadConfig& head_cfg = {}) {
  AugmentContext ctx{denoiser, sched, dataset, nullptr};
  ConfusionMatrix cm;
  if (spec.method == Provenance::genie && spec.source_policy == SourcePolicy::confusion_topk) {
    cm = episode_confusion(ep, head_cfg);
    ctx.confusion = &cm;
  }
  const AugmentedSupport aug = augment_support(ep.support, spec, ctx, gen_rng);

  const std::vector<TrainExample> train = aug.train_examples();
  const LogRegHead head =
      fit_logreg(std::span<const TrainExample>(train), ep.n_way, head_cfg.l2, head_cfg.steps,
                 head_cfg.lr);

  std::size_t hits = 0;
  for (const auto& q : ep.query)
    if (logreg_predict(head, q.x) == q.y) ++hits;

  EpisodeEval out;
  out.accuracy = static_cast<double>(hits) / static_cast<double>(ep.query.size());
  out.augmented_size = aug.samples.size();
  for (std::size_t i = ep.support.size(); i < aug.samples.size(); ++i) {
    LabeledSample g = aug.samples[i];
    g.y = ep.class_remap[static_cast<std::size_t>(g.y)];
    if (g.source_class) g.source_class = ep.class_remap[static_cast<std::size_t>(*g.source_class)];
    out.generated.push_back(std::move(g));
  }
  return out;
}

struct BenchmarkArgs {
  std::size_t n_way = 5;
  std::size_t k_shot = 1;
  std::size_t q_per_class = 16;
  std::size_t episodes = 200;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  HeadConfig head;
};

struct BenchmarkResult {
  BenchmarkArgs args;
  std::vector<EvalReport> reports;                 // parallel to the spec list
  std::vector<PairedDiff> paired;                  // specs[i] - specs[0], i >= 1
  std::vector<std::uint64_t> episode_fingerprint;  // per spec; equal => same stream
  std::vector<std::size_t> augmented_size;         // per spec, constant over episodes
};

// Every spec sees the byte-identical episode stream (substreams keyed by the
// master seed and episode index only) and generation substreams keyed by the
// spec's canonical string, so comparisons are paired and order-independent.
inline BenchmarkResult run_benchmark(const Dataset& ds,
                                     const std::vector<AugmentationSpec>& specs,
                                     const BenchmarkArgs& args, const Denoiser* denoiser,
                                     const NoiseSchedule* sched, const OracleModel* oracle) {
  if (args.episodes < 2) throw std::invalid_argument("run_benchmark: episodes must be >= 2");
  if (specs.empty()) throw std::invalid_argument("run_benchmark: no specs");
  for (const auto& spec : specs) spec.validate();

  const auto t0 = std::chrono::steady_clock::now();
  RngStream master(args.seed);
  const RngStream episode_lane = master.child("episodes");
  const RngStream gen_lane = master.child("generation");

  std::vector<std::vector<EpisodeEval>> evals(specs.size());
  for (auto& v : evals) v.resize(args.episodes);
  std::vector<std::uint64_t> ep_hash(args.episodes, 0);

  parallel_for(args.episodes, args.threads, [&](std::size_t e) {
    RngStream ep_rng = episode_lane.child(e);
    const Episode ep = sample_episode(ds, args.n_way, args.k_shot, args.q_per_class, ep_rng);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (auto idx : ep.support_src) h = (h ^ idx) * 0x100000001b3ull;
    for (auto idx : ep.query_src) h = (h ^ idx) * 0x100000001b3ull;
    ep_hash[e] = h;
    for (std::size_t si = 0; si < specs.size(); ++si) {
      const std::uint64_t spec_key = detail::fnv1a64(specs[si].canonical());
      RngStream gen_rng = gen_lane.child(e).child(spec_key);
      evals[si][e] =
          eval_episode(ep, specs[si], denoiser, sched, &ds, std::move(gen_rng), args.head);
    }
  });

  BenchmarkResult result;
  result.args = args;
  for (std::size_t si = 0; si < specs.size(); ++si) {
    EvalReport rep;
    rep.spec_name = specs[si].name();
    rep.spec_canonical = specs[si].canonical();
    std::vector<LabeledSample> generated;
    std::uint64_t fingerprint = 0;
    std::size_t aug_size = 0;
    for (std::size_t e = 0; e < args.episodes; ++e) {
      rep.per_episode.push_back(evals[si][e].accuracy);
      fingerprint ^= detail::splitmix64(ep_hash[e] + 0x9E3779B97F4A7C15ull * e +
                                        evals[si][e].augmented_size);
      aug_size = evals[si][e].augmented_size;
      if (evals[si][e].augmented_size !=
          args.n_way * (args.k_shot + (specs[si].method == Provenance::real
                                           ? 0
                                           : specs[si].per_class_count)))
        throw InvariantError("run_benchmark: augmented support size violates the fairness rule");
      for (auto& g : evals[si][e].generated) generated.push_back(std::move(g));
    }
    rep.mean = mean_of(rep.per_episode);
    rep.ci95 = ci95_halfwidth(rep.per_episode);
    if (oracle != nullptr && !generated.empty())
      rep.consistency = label_consistency(generated, *oracle);
    result.reports.push_back(std::move(rep));
    result.episode_fingerprint.push_back(fingerprint);
    result.augmented_size.push_back(aug_size);
  }

  for (std::size_t si = 1; si < specs.size(); ++si) {
    std::vector<double> diffs(args.episodes);
    for (std::size_t e = 0; e < args.episodes; ++e)
      diffs[e] = result.reports[si].per_episode[e] - result.reports[0].per_episode[e];
    result.paired.push_back(
        {result.reports[si].spec_name, mean_of(diffs), ci95_halfwidth(diffs)});
  }

  const auto t1 = std::chrono::steady_clock::now();
  const double secs = std::chrono::duration<double>(t1 - t0).count();
  for (auto& rep : result.reports) rep.runtime_seconds = secs;
  return result;
}

// ---------------------------------------------------------------------------
// Long-tail protocol

struct LongTailResult {
  EvalReport report;
  ConfusionMatrix confusion;
  std::vector<LabeledSample> generated;
  bool source_fallback_used = false;
};

// Generates up to `cap` samples for each Few-bucket class (sources drawn from
// the top-k most confused classes of a head trained on the real data),
// retrains the head on real + generated, and scores a balanced test set.
inline LongTailResult run_longtail(const LongTailDataset& lt, const AugmentationSpec& spec,
                                   const Denoiser& d, const NoiseSchedule& sched,
                                   const OracleModel* oracle, std::size_t cap,
                                   const Dataset& test_set, std::uint64_t seed,
                                   const HeadConfig& head_cfg = {}) {
  spec.validate();
  const std::size_t n_classes = lt.train.n_classes();
  RngStream master(seed);
  RngStream gen_lane = master.child("longtail-gen");

  LongTailResult result;
  const LogRegHead base_head =
      fit_logreg(std::span<const LabeledSample>(lt.train.samples), n_classes, head_cfg.l2,
                 head_cfg.steps, head_cfg.lr);
  result.confusion = ConfusionMatrix(n_classes);
  for (const auto& s : lt.train.samples)
    result.confusion.record(s.y, logreg_predict(base_head, s.x));

  if (spec.method != Provenance::real && cap > 0) {
    for (const int c : lt.classes_in(Bucket::few)) {
      RngStream class_rng = gen_lane.child(static_cast<std::uint64_t>(c));
      for (std::size_t j = 0; j < cap; ++j) {
        RngStream rng = class_rng.child(j);
        switch (spec.method) {
          case Provenance::genie: {
            const SourcePick pick =
                pick_source(c, result.confusion, spec.confusion_topk, rng);
            result.source_fallback_used |= pick.used_fallback;
            const auto& pool = lt.train.by_class[static_cast<std::size_t>(pick.label)];
            const auto& src = lt.train.samples[pool[rng.uniform_below(pool.size())]];
            result.generated.push_back(
                genie_sample(src, c, spec.r, d, sched, rng, spec.w));
            break;
          }
          case Provenance::img2img: {
            const auto& pool = lt.train.by_class[static_cast<std::size_t>(c)];
            const auto& src = lt.train.samples[pool[rng.uniform_below(pool.size())]];
            result.generated.push_back(img2img_sample(src, spec.r, d, sched, rng, spec.w));
            break;
          }
          case Provenance::condsample:
            result.generated.push_back(cond_sample_labeled(d, c, sched, rng, spec.w));
            break;
          default:
            throw std::invalid_argument("run_longtail: unsupported augmentation method");
        }
      }
    }
  }

  std::vector<LabeledSample> train = lt.train.samples;
  train.insert(train.end(), result.generated.begin(), result.generated.end());
  const LogRegHead head = fit_logreg(std::span<const LabeledSample>(train), n_classes,
                                     head_cfg.l2, head_cfg.steps, head_cfg.lr);

  BucketReport buckets;
  std::size_t hits_many = 0, hits_med = 0, hits_few = 0;
  for (const auto& q : test_set.samples) {
    const bool hit = logreg_predict(head, q.x) == q.y;
    switch (lt.bucket[static_cast<std::size_t>(q.y)]) {
      case Bucket::many:
        ++buckets.many_n;
        hits_many += hit;
        break;
      case Bucket::med:
        ++buckets.med_n;
        hits_med += hit;
        break;
      case Bucket::few:
        ++buckets.few_n;
        hits_few += hit;
        break;
    }
  }
  const auto frac = [](std::size_t h, std::size_t n) {
    return n == 0 ? 0.0 : static_cast<double>(h) / static_cast<double>(n);
  };
  buckets.many = frac(hits_many, buckets.many_n);
  buckets.med = frac(hits_med, buckets.med_n);
  buckets.few = frac(hits_few, buckets.few_n);
  buckets.overall = frac(hits_many + hits_med + hits_few,
                         buckets.many_n + buckets.med_n + buckets.few_n);

  result.report.spec_name = spec.name();
  result.report.spec_canonical = spec.canonical();
  result.report.mean = buckets.overall;
  result.report.buckets = buckets;
  if (oracle != nullptr && !result.generated.empty())
    result.report.consistency = label_consistency(result.generated, *oracle);
  return result;
}

// ---------------------------------------------------------------------------
// Noise-ratio sweep

struct SweepRow {
  double r = 0.0;
  double mean = 0.0;
  double ci95 = 0.0;
  double consistency = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  BenchmarkResult bench;  // one spec per r, fully paired
};

inline SweepResult noise_sweep(const std::vector<double>& rs, const Dataset& ds,
                               const AugmentationSpec& base, const BenchmarkArgs& args,
                               const Denoiser& d, const NoiseSchedule& sched,
                               const OracleModel& oracle) {
  if (rs.empty()) throw std::invalid_argument("noise_sweep: empty r grid");
  std::vector<AugmentationSpec> specs;
  for (double r : rs) {
    if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("noise_sweep: r must be in (0, 1)");
    AugmentationSpec spec = base;
    spec.method = Provenance::genie;
    spec.r = r;
    specs.push_back(spec);
  }
  SweepResult out;
  out.bench = run_benchmark(ds, specs, args, &d, &sched, &oracle);
  for (std::size_t i = 0; i < rs.size(); ++i) {
    out.rows.push_back({rs[i], out.bench.reports[i].mean, out.bench.reports[i].ci95,
                        out.bench.reports[i].consistency.value_or(0.0)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Boundary occupancy analysis

struct MethodSamples {
  std::vector<LabeledSample> samples;
  // Context descriptor of the paired source sample, when one exists.
  std::vector<std::optional<std::vector<double>>> source_context;
};

struct BoundaryPoint {
  double px = 0.0, py = 0.0;
  std::string method;
  int label = 0;
  double margin = 0.0;
};

struct MethodMarginStats {
  std::string method;
  std::size_t count = 0;
  double mean_margin = 0.0;
  double median_margin = 0.0;
  std::optional<double> mean_context_distance;
};

struct BoundaryReport {
  std::vector<MethodMarginStats> stats;  // sorted by method name
  std::vector<BoundaryPoint> points;
  std::string projection;  // "identity" | "pca2" | "first2"
  bool projection_fallback = false;
};

// Cyclic Jacobi eigensolver for small symmetric matrices.
inline void jacobi_eigen(Matrix a, std::vector<double>& values, Matrix& vectors) {
  const std::size_t n = a.rows;
  vectors = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) vectors(i, i) = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = vectors(k, p), vkq = vectors(k, q);
          vectors(k, p) = c * vkp - s * vkq;
          vectors(k, q) = s * vkp + c * vkq;
        }
      }
  }
  values.resize(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = a(i, i);
}

struct Projection {
  std::string kind;  // "identity" | "pca2" | "first2"
  bool fallback = false;
  std::vector<double> mean;
  std::vector<double> axis0, axis1;

  std::pair<double, double> apply(std::span<const double> x) const {
    if (kind == "identity" || kind == "first2") return {x[0], x[1]};
    double px = 0.0, py = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double v = x[i] - mean[i];
      px += axis0[i] * v;
      py += axis1[i] * v;
    }
    return {px, py};
  }
};

// Identity projection for 2-D-structured blobs; top-2 principal components
// fitted on the real data otherwise. Degenerate covariance falls back to the
// first two coordinates and flags it.
inline Projection fit_projection(const Dataset& ds) {
  Projection proj;
  if (ds.cfg.kind == TaskKind::blobs2d) {
    proj.kind = "identity";
    return proj;
  }
  const std::size_t dim = ds.data_dim;
  proj.mean.assign(dim, 0.0);
  for (const auto& s : ds.samples) axpy(1.0, s.x, proj.mean);
  for (auto& v : proj.mean) v /= static_cast<double>(ds.samples.size());
  Matrix cov(dim, dim);
  std::vector<double> centered(dim);
  for (const auto& s : ds.samples) {
    for (std::size_t i = 0; i < dim; ++i) centered[i] = s.x[i] - proj.mean[i];
    outer_add(cov, centered, centered);
  }
  for (auto& v : cov.data) v /= static_cast<double>(ds.samples.size());

  std::vector<double> values;
  Matrix vectors;
  jacobi_eigen(cov, values, vectors);
  std::vector<std::size_t> order(dim);
  for (std::size_t i = 0; i < dim; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });

  double trace = 0.0;
  for (double v : values) trace += std::max(v, 0.0);
  if (dim < 2 || trace <= 0.0 || values[order[1]] <= 1e-12 * trace) {
    proj.kind = "first2";
    proj.fallback = true;
    return proj;
  }
  proj.kind = "pca2";
  proj.axis0.resize(dim);
  proj.axis1.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    proj.axis0[i] = vectors(i, order[0]);
    proj.axis1[i] = vectors(i, order[1]);
  }
  // Deterministic sign: the largest-magnitude component points positive.
  for (auto* axis : {&proj.axis0, &proj.axis1}) {
    std::size_t big = 0;
    for (std::size_t i = 1; i < dim; ++i)
      if (std::abs((*axis)[i]) > std::abs((*axis)[big])) big = i;
    if ((*axis)[big] < 0.0)
      for (auto& v : *axis) v = -v;
  }
  return proj;
}

inline BoundaryReport boundary_analysis(const std::map<std::string, MethodSamples>& by_method,
                                        const OracleModel& oracle, const Dataset& ds,
                                        std::size_t min_per_method = 50) {
  if (by_method.size() < 2)
    throw std::invalid_argument("boundary_analysis: need at least 2 methods");
  for (const auto& [name, ms] : by_method)
    if (ms.samples.size() < min_per_method)
      throw std::invalid_argument("boundary_analysis: method " + name + " has fewer than " +
                                  std::to_string(min_per_method) + " samples");

  const Projection proj = fit_projection(ds);
  BoundaryReport report;
  report.projection = proj.kind;
  report.projection_fallback = proj.fallback;

  for (const auto& [name, ms] : by_method) {
    MethodMarginStats stats;
    stats.method = name;
    stats.count = ms.samples.size();
    std::vector<double> margins;
    margins.reserve(ms.samples.size());
    double ctx_acc = 0.0;
    std::size_t ctx_n = 0;
    for (std::size_t i = 0; i < ms.samples.size(); ++i) {
      const auto& s = ms.samples[i];
      const double m = oracle.margin(s.x);
      margins.push_back(m);
      auto [px, py] = proj.apply(s.x);
      report.points.push_back({px, py, name, s.y, m});
      if (ms.source_context[i]) {
        const std::vector<double> ctx = ds.context_descriptor(s.x);
        double d2 = 0.0;
        for (std::size_t k = 0; k < ctx.size(); ++k) {
          const double dv = ctx[k] - (*ms.source_context[i])[k];
          d2 += dv * dv;
        }
        ctx_acc += std::sqrt(d2);
        ++ctx_n;
      }
    }
    stats.mean_margin = mean_of(margins);
    std::sort(margins.begin(), margins.end());
    stats.median_margin = margins.size() % 2 == 1
                              ? margins[margins.size() / 2]
                              : 0.5 * (margins[margins.size() / 2 - 1] +
                                       margins[margins.size() / 2]);
    if (ctx_n > 0) stats.mean_context_distance = ctx_acc / static_cast<double>(ctx_n);
    report.stats.push_back(std::move(stats));
  }
  return report;
}

struct BoundarySetArgs {
  std::size_t per_method = 500;
  double genie_r = 0.8;
  double img2img_r = 0.7;
  double w = 2.0;
  std::uint64_t seed = 0;
  std::vector<std::string> methods = {"real", "genie", "condsample", "img2img"};
};

// Draws the paired sample sets the boundary plot compares. genie and
// condsample share the same (source, target) pairing per index, so the
// condsample column measures how far a source-blind draw lands from the same
// reference context.
inline std::map<std::string, MethodSamples> make_boundary_samples(const Dataset& ds,
                                                                  const Denoiser& d,
                                                                  const NoiseSchedule& sched,
                                                                  const BoundarySetArgs& args) {
  RngStream master(args.seed);
  RngStream lane = master.child("boundary");
  std::map<std::string, MethodSamples> out;
  for (const auto& m : args.methods) out[m] = {};

  for (std::size_t j = 0; j < args.per_method; ++j) {
    RngStream rng = lane.child(j);
    const auto& src = ds.samples[rng.uniform_below(ds.samples.size())];
    int target = static_cast<int>(rng.uniform_below(ds.n_classes()));
    if (target == src.y) target = (target + 1) % static_cast<int>(ds.n_classes());
    const std::vector<double> src_ctx = ds.context_descriptor(src.x);

    if (out.count("real")) {
      RngStream r = rng.child("real");
      out["real"].samples.push_back(ds.samples[r.uniform_below(ds.samples.size())]);
      out["real"].source_context.push_back(std::nullopt);
    }
    if (out.count("genie")) {
      RngStream r = rng.child("genie");
      out["genie"].samples.push_back(
          genie_sample(src, target, args.genie_r, d, sched, r, args.w));
      out["genie"].source_context.push_back(src_ctx);
    }
    if (out.count("condsample")) {
      RngStream r = rng.child("condsample");
      out["condsample"].samples.push_back(cond_sample_labeled(d, target, sched, r, args.w));
      out["condsample"].source_context.push_back(src_ctx);
    }
    if (out.count("img2img")) {
      RngStream r = rng.child("img2img");
      const auto& pool = ds.by_class[static_cast<std::size_t>(target)];
      const auto& own = ds.samples[pool[r.uniform_below(pool.size())]];
      out["img2img"].samples.push_back(img2img_sample(own, args.img2img_r, d, sched, r, args.w));
      out["img2img"].source_context.push_back(ds.context_descriptor(own.x));
    }
  }
  return out;
}

}  // namespace genie
