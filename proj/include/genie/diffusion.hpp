#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "genie/adam.hpp"
#include "genie/denoiser.hpp"
#include "genie/errors.hpp"
#include "genie/rng.hpp"
#include "genie/sample.hpp"
#include "genie/schedule.hpp"

namespace genie {

// Closed-form forward noising to step n: x_n = sqrt(abar_n) x0 + sqrt(1-abar_n) eps.
// n = 0 is the identity and draws nothing from the stream.
inline std::vector<double> forward_noise(std::span<const double> x0, std::size_t n,
                                         const NoiseSchedule& sched, RngStream& rng) {
  if (n > sched.T) throw std::invalid_argument("forward_noise: n exceeds T");
  std::vector<double> x(x0.begin(), x0.end());
  if (n == 0) return x;
  const double sa = std::sqrt(sched.alpha_bar[n]);
  const double sn = std::sqrt(1.0 - sched.alpha_bar[n]);
  for (auto& v : x) v = sa * v + sn * rng.gaussian();
  return x;
}

// DDPM ancestral reverse steps t = n..1 with sigma_t^2 = beta_t (1 - abar_{t-1}) / (1 - abar_t);
// no noise is added at t = 1. n = 0 returns the input unchanged.
inline std::vector<double> reverse_from(std::span<const double> x_n, std::size_t n,
                                        const CondLabel& cond, const Denoiser& d,
                                        const NoiseSchedule& sched, RngStream& rng, double w) {
  if (n > sched.T) throw std::invalid_argument("reverse_from: n exceeds T");
  std::vector<double> x(x_n.begin(), x_n.end());
  for (std::size_t t = n; t >= 1; --t) {
    const std::vector<double> eps = predict_eps(d, x, t, cond, w);
    const double coef = sched.beta[t] / std::sqrt(1.0 - sched.alpha_bar[t]);
    const double inv_sqrt_alpha = 1.0 / std::sqrt(sched.alpha[t]);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = inv_sqrt_alpha * (x[i] - coef * eps[i]);
    if (t > 1) {
      const double sigma = std::sqrt(sched.beta[t] * (1.0 - sched.alpha_bar[t - 1]) /
                                     (1.0 - sched.alpha_bar[t]));
      for (auto& v : x) v += sigma * rng.gaussian();
    }
  }
  return x;
}

// Pure conditional generation: reverse the full chain from a fresh Gaussian.
inline std::vector<double> cond_sample(const Denoiser& d, const CondLabel& cond,
                                       const NoiseSchedule& sched, RngStream& rng, double w) {
  const std::vector<double> x_T = rng.gaussians(d.data_dim);
  return reverse_from(x_T, sched.T, cond, d, sched, rng, w);
}

struct TrainConfig {
  std::size_t steps = 4000;
  std::size_t batch_size = 128;
  double lr = 1e-3;
  double cfg_dropout_prob = 0.1;
  std::uint64_t seed = 0;
  std::vector<std::size_t> hidden = {128, 128};
  std::size_t time_embed_dim = 16;
  std::size_t class_embed_dim = 16;
  std::size_t n_classes = 0;        // 0 = derive from labels
  std::size_t n_superclasses = 0;   // 0 = composite labels disabled
  std::vector<int> superclass_of;   // per-class superclass, empty = none
};

struct TrainResult {
  Denoiser denoiser;
  std::vector<double> loss_curve;  // per-step batch loss
};

// Trailing-window smoothing used for loss-curve reporting and tests.
inline std::vector<double> smooth_losses(const std::vector<double>& raw, std::size_t window = 100) {
  std::vector<double> out(raw.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    acc += raw[i];
    if (i >= window) acc -= raw[i - window];
    out[i] = acc / static_cast<double>(std::min(i + 1, window));
  }
  return out;
}

// Epsilon-prediction training with classifier-free guidance dropout: the class
// condition is replaced by the null row with probability cfg_dropout_prob, so
// the same network learns both branches. Loss per item is |eps_hat - eps|^2
// summed over dimensions (an untrained zero output layer scores ~data_dim).
inline TrainResult train_denoiser(std::span<const LabeledSample> dataset,
                                  const NoiseSchedule& sched, const TrainConfig& cfg) {
  if (dataset.empty()) throw std::invalid_argument("train_denoiser: empty dataset");
  if (!(cfg.cfg_dropout_prob >= 0.0) || !(cfg.cfg_dropout_prob < 1.0))
    throw std::invalid_argument("train_denoiser: cfg_dropout_prob must be in [0, 1)");

  std::size_t n_classes = cfg.n_classes;
  for (const auto& s : dataset) {
    if (s.y < 0) throw std::invalid_argument("train_denoiser: negative label");
    n_classes = std::max(n_classes, static_cast<std::size_t>(s.y) + 1);
  }
  if (cfg.n_classes != 0) {
    for (const auto& s : dataset)
      if (static_cast<std::size_t>(s.y) >= cfg.n_classes)
        throw std::invalid_argument("train_denoiser: label outside [0, n_classes)");
  }
  const std::size_t data_dim = dataset.front().x.size();

  RngStream root(cfg.seed);
  RngStream init_rng = root.child("init");
  RngStream batch_rng = root.child("batch");

  Denoiser d;
  d.data_dim = data_dim;
  d.n_classes = n_classes;
  d.time_embed_dim = cfg.time_embed_dim;
  d.class_embed_dim = cfg.class_embed_dim;
  d.net = make_mlp(d.input_dim(), cfg.hidden, data_dim, init_rng, /*zero_last=*/true);
  // Zero-init embeddings: rows only move once they receive gradient, so with
  // full dropout the class rows provably stay at the null value.
  d.class_embedding = Matrix(n_classes + 1, cfg.class_embed_dim);
  if (cfg.n_superclasses > 0) d.superclass_embedding = Matrix(cfg.n_superclasses, cfg.class_embed_dim);

  AdamState adam({.lr = cfg.lr});
  NetGrads grads = NetGrads::zeros_like(d.net);
  Matrix emb_grads(d.class_embedding.rows, d.class_embedding.cols);
  Matrix super_grads(d.superclass_embedding.rows, d.superclass_embedding.cols);

  TrainResult result;
  result.loss_curve.reserve(cfg.steps);

  std::vector<double> x_t(data_dim), eps(data_dim), upstream(data_dim);
  NetTrace trace;

  for (std::size_t step = 0; step < cfg.steps; ++step) {
    for (auto& m : grads.dw) m.fill(0.0);
    for (auto& b : grads.db) b.assign(b.size(), 0.0);
    grads.dx.assign(grads.dx.size(), 0.0);
    emb_grads.fill(0.0);
    super_grads.fill(0.0);

    double loss = 0.0;
    for (std::size_t b = 0; b < cfg.batch_size; ++b) {
      const LabeledSample& s = dataset[batch_rng.uniform_below(dataset.size())];
      const std::size_t t = 1 + batch_rng.uniform_below(sched.T);
      const double sa = std::sqrt(sched.alpha_bar[t]);
      const double sn = std::sqrt(1.0 - sched.alpha_bar[t]);
      for (std::size_t i = 0; i < data_dim; ++i) {
        eps[i] = batch_rng.gaussian();
        x_t[i] = sa * s.x[i] + sn * eps[i];
      }
      CondLabel cond = CondLabel::of(s.y);
      if (!cfg.superclass_of.empty()) cond.superclass = cfg.superclass_of[s.y];
      const bool dropped = batch_rng.uniform01() < cfg.cfg_dropout_prob;
      if (dropped) cond = CondLabel::none();

      const std::vector<double> in = d.assemble_input(x_t, t, cond);
      const std::vector<double> out = net_forward_traced(d.net, in, trace);
      for (std::size_t i = 0; i < data_dim; ++i) {
        const double r = out[i] - eps[i];
        loss += r * r;
        upstream[i] = 2.0 * r / static_cast<double>(cfg.batch_size);
      }
      grads.dx.assign(grads.dx.size(), 0.0);
      net_backward_accumulate(d.net, in, trace, upstream, grads);
      // Route the input-gradient slice into the embedding rows that built it.
      const auto emb_slice = std::span<const double>(grads.dx).subspan(
          data_dim + cfg.time_embed_dim, cfg.class_embed_dim);
      const std::size_t row = cond.cls ? static_cast<std::size_t>(*cond.cls) : n_classes;
      axpy(1.0, emb_slice, emb_grads.row(row));
      if (cond.cls && cond.superclass)
        axpy(1.0, emb_slice, super_grads.row(static_cast<std::size_t>(*cond.superclass)));
    }
    loss /= static_cast<double>(cfg.batch_size);
    if (!std::isfinite(loss))
      throw NumericError("train_denoiser: loss diverged at step " + std::to_string(step));
    result.loss_curve.push_back(loss);

    std::vector<std::span<double>> params;
    std::vector<std::span<const double>> gspans;
    for (std::size_t l = 0; l < d.net.layers.size(); ++l) {
      params.emplace_back(d.net.layers[l].w.data);
      gspans.emplace_back(grads.dw[l].data);
      params.emplace_back(d.net.layers[l].b);
      gspans.emplace_back(grads.db[l]);
    }
    params.emplace_back(d.class_embedding.data);
    gspans.emplace_back(emb_grads.data);
    if (d.superclass_embedding.size() > 0) {
      params.emplace_back(d.superclass_embedding.data);
      gspans.emplace_back(super_grads.data);
    }
    adam.step(params, gspans);
  }

  if (!net_finite(d.net) || !all_finite(d.class_embedding.data))
    throw NumericError("train_denoiser: non-finite parameters after training");
  result.denoiser = std::move(d);
  return result;
}

}  // namespace genie
