#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "genie/rng.hpp"

namespace genie {

// Row = true class, column = predicted class.
struct ConfusionMatrix {
  std::size_t n_classes = 0;
  std::vector<std::int64_t> counts;

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t n) : n_classes(n), counts(n * n, 0) {}

  std::int64_t& at(std::size_t true_cls, std::size_t pred_cls) {
    return counts[true_cls * n_classes + pred_cls];
  }
  std::int64_t at(std::size_t true_cls, std::size_t pred_cls) const {
    return counts[true_cls * n_classes + pred_cls];
  }

  void record(int true_cls, int pred_cls) {
    at(static_cast<std::size_t>(true_cls), static_cast<std::size_t>(pred_cls)) += 1;
  }

  std::int64_t row_sum(std::size_t true_cls) const {
    std::int64_t s = 0;
    for (std::size_t j = 0; j < n_classes; ++j) s += at(true_cls, j);
    return s;
  }
};

struct SourcePick {
  int label = 0;
  bool used_fallback = false;  // all confusion mass for the target was zero
};

// Uniform pick among the k classes most confused with the target. Confusion
// mass is symmetrized (cm[t][c] + cm[c][t]); ties break by ascending index.
inline SourcePick pick_source(int target, const ConfusionMatrix& cm, std::size_t k,
                              RngStream& rng) {
  if (k < 1) throw std::invalid_argument("pick_source: k must be >= 1");
  if (cm.n_classes < 2) throw std::invalid_argument("pick_source: need at least 2 classes");
  const auto t = static_cast<std::size_t>(target);

  std::vector<std::pair<std::int64_t, std::size_t>> scored;  // (-mass, class)
  std::int64_t total_mass = 0;
  for (std::size_t c = 0; c < cm.n_classes; ++c) {
    if (c == t) continue;
    const std::int64_t mass = cm.at(t, c) + cm.at(c, t);
    total_mass += mass;
    scored.emplace_back(-mass, c);
  }
  SourcePick pick;
  if (total_mass == 0) {
    pick.used_fallback = true;
    pick.label = static_cast<int>(scored[rng.uniform_below(scored.size())].second);
    return pick;
  }
  std::sort(scored.begin(), scored.end());
  const std::size_t top = std::min(k, scored.size());
  pick.label = static_cast<int>(scored[rng.uniform_below(top)].second);
  return pick;
}

}  // namespace genie
