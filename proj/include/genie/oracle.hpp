#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "genie/adam.hpp"
#include "genie/dataset.hpp"
#include "genie/errors.hpp"
#include "genie/logreg.hpp"
#include "genie/net.hpp"
#include "genie/rng.hpp"

namespace genie {

struct OracleConfig {
  std::size_t hidden = 64;
  std::size_t steps = 2500;
  std::size_t batch_size = 256;
  double lr = 3e-3;
  double holdout_fraction = 0.25;
  double min_accuracy = 0.97;
  std::size_t min_per_class = 200;
  std::uint64_t seed = 7;
};

// Judge-only classifier trained on the full balanced dataset. Never used to
// train the evaluated model, only to read labels off generated samples.
struct OracleModel {
  Net net;
  std::size_t n_classes = 0;
  double heldout_accuracy = 0.0;

  std::vector<double> probs(std::span<const double> x) const {
    return softmax(net_forward(net, x));
  }
  int predict(std::span<const double> x) const { return argmax_index(probs(x)); }

  // Top-1 minus top-2 probability.
  double margin(std::span<const double> x) const {
    std::vector<double> p = probs(x);
    std::nth_element(p.begin(), p.begin() + 1, p.end(), std::greater<double>());
    return p[0] >= p[1] ? p[0] - p[1] : p[1] - p[0];
  }
};

inline OracleModel train_oracle(const Dataset& ds, const OracleConfig& cfg = {}) {
  for (const auto& members : ds.by_class) {
    if (members.size() != ds.by_class.front().size())
      throw std::invalid_argument("train_oracle: dataset must be balanced");
    if (members.size() < cfg.min_per_class)
      throw std::invalid_argument("train_oracle: need >= " + std::to_string(cfg.min_per_class) +
                                  " samples per class");
  }
  const std::size_t n_classes = ds.n_classes();

  RngStream root(cfg.seed);
  RngStream split_rng = root.child("split");
  RngStream init_rng = root.child("init");
  RngStream batch_rng = root.child("batch");

  std::vector<std::size_t> train_idx, held_idx;
  for (const auto& members : ds.by_class) {
    const auto order = split_rng.sample_without_replacement(members.size(), members.size());
    const auto held = static_cast<std::size_t>(
        std::floor(cfg.holdout_fraction * static_cast<double>(members.size())));
    for (std::size_t j = 0; j < members.size(); ++j)
      (j < held ? held_idx : train_idx).push_back(members[order[j]]);
  }

  OracleModel oracle;
  oracle.n_classes = n_classes;
  oracle.net = make_mlp(ds.data_dim, {cfg.hidden}, n_classes, init_rng, /*zero_last=*/true);

  AdamState adam({.lr = cfg.lr});
  NetGrads grads = NetGrads::zeros_like(oracle.net);
  NetTrace trace;
  std::vector<double> upstream(n_classes);

  for (std::size_t step = 0; step < cfg.steps; ++step) {
    for (auto& m : grads.dw) m.fill(0.0);
    for (auto& b : grads.db) b.assign(b.size(), 0.0);
    for (std::size_t b = 0; b < cfg.batch_size; ++b) {
      const auto& s = ds.samples[train_idx[batch_rng.uniform_below(train_idx.size())]];
      const std::vector<double> logits = net_forward_traced(oracle.net, s.x, trace);
      std::vector<double> p = softmax(logits);
      p[static_cast<std::size_t>(s.y)] -= 1.0;
      for (std::size_t k = 0; k < n_classes; ++k)
        upstream[k] = p[k] / static_cast<double>(cfg.batch_size);
      grads.dx.assign(grads.dx.size(), 0.0);
      net_backward_accumulate(oracle.net, s.x, trace, upstream, grads);
    }
    std::vector<std::span<double>> params;
    std::vector<std::span<const double>> gspans;
    for (std::size_t l = 0; l < oracle.net.layers.size(); ++l) {
      params.emplace_back(oracle.net.layers[l].w.data);
      gspans.emplace_back(grads.dw[l].data);
      params.emplace_back(oracle.net.layers[l].b);
      gspans.emplace_back(grads.db[l]);
    }
    adam.step(params, gspans);
  }

  std::size_t hits = 0;
  for (auto idx : held_idx)
    if (oracle.predict(ds.samples[idx].x) == ds.samples[idx].y) ++hits;
  oracle.heldout_accuracy =
      held_idx.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(held_idx.size());
  if (oracle.heldout_accuracy < cfg.min_accuracy)
    throw InvariantError("train_oracle: held-out accuracy " +
                         std::to_string(oracle.heldout_accuracy) + " below required " +
                         std::to_string(cfg.min_accuracy));
  return oracle;
}

}  // namespace genie
