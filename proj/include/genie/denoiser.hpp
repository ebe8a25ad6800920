#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "genie/mat.hpp"
#include "genie/net.hpp"

namespace genie {

// Conditioning signal: a class index, optionally enriched with a superclass
// index that selects an additive second embedding. Empty = unconditional.
struct CondLabel {
  std::optional<int> cls;
  std::optional<int> superclass;

  static CondLabel none() { return {}; }
  static CondLabel of(int c) { return {c, std::nullopt}; }
  static CondLabel of(int c, int super) { return {c, super}; }
};

// Epsilon-prediction network with sinusoidal time embedding and a learned
// class-embedding table. Row n_classes of the table is the null condition.
struct Denoiser {
  Net net;
  std::size_t data_dim = 0;
  std::size_t n_classes = 0;
  std::size_t time_embed_dim = 16;
  std::size_t class_embed_dim = 16;
  Matrix class_embedding;       // (n_classes + 1) x class_embed_dim
  Matrix superclass_embedding;  // n_superclasses x class_embed_dim (may be empty)

  // Evaluation counter for tests; atomic so parallel sampling stays defined.
  mutable std::atomic<std::uint64_t> net_evals{0};

  Denoiser() = default;
  Denoiser(const Denoiser& o)
      : net(o.net),
        data_dim(o.data_dim),
        n_classes(o.n_classes),
        time_embed_dim(o.time_embed_dim),
        class_embed_dim(o.class_embed_dim),
        class_embedding(o.class_embedding),
        superclass_embedding(o.superclass_embedding),
        net_evals(o.net_evals.load()) {}
  Denoiser(Denoiser&& o) noexcept
      : net(std::move(o.net)),
        data_dim(o.data_dim),
        n_classes(o.n_classes),
        time_embed_dim(o.time_embed_dim),
        class_embed_dim(o.class_embed_dim),
        class_embedding(std::move(o.class_embedding)),
        superclass_embedding(std::move(o.superclass_embedding)),
        net_evals(o.net_evals.load()) {}
  Denoiser& operator=(const Denoiser& o) {
    if (this != &o) *this = Denoiser(o);
    return *this;
  }
  Denoiser& operator=(Denoiser&& o) noexcept {
    net = std::move(o.net);
    data_dim = o.data_dim;
    n_classes = o.n_classes;
    time_embed_dim = o.time_embed_dim;
    class_embed_dim = o.class_embed_dim;
    class_embedding = std::move(o.class_embedding);
    superclass_embedding = std::move(o.superclass_embedding);
    net_evals.store(o.net_evals.load());
    return *this;
  }

  std::size_t input_dim() const { return data_dim + time_embed_dim + class_embed_dim; }

  void time_embedding(std::size_t t, std::span<double> out) const {
    const std::size_t half = time_embed_dim / 2;
    for (std::size_t i = 0; i < half; ++i) {
      const double freq =
          std::pow(10000.0, -static_cast<double>(i) / static_cast<double>(half));
      out[2 * i] = std::sin(static_cast<double>(t) * freq);
      out[2 * i + 1] = std::cos(static_cast<double>(t) * freq);
    }
  }

  // Embedding row for a condition; null row when unconditional, plus the
  // additive superclass row when the label carries one.
  void condition_embedding(const CondLabel& cond, std::span<double> out) const {
    const std::size_t row = cond.cls ? static_cast<std::size_t>(*cond.cls) : n_classes;
    if (row > n_classes) throw std::invalid_argument("denoiser: class index out of range");
    auto base = class_embedding.row(row);
    for (std::size_t i = 0; i < class_embed_dim; ++i) out[i] = base[i];
    if (cond.cls && cond.superclass) {
      const auto srow = static_cast<std::size_t>(*cond.superclass);
      if (srow >= superclass_embedding.rows)
        throw std::invalid_argument("denoiser: superclass index out of range");
      auto extra = superclass_embedding.row(srow);
      for (std::size_t i = 0; i < class_embed_dim; ++i) out[i] += extra[i];
    }
  }

  std::vector<double> assemble_input(std::span<const double> x_t, std::size_t t,
                                     const CondLabel& cond) const {
    check_dim(x_t.size() == data_dim, "denoiser: data dimension mismatch");
    std::vector<double> in(input_dim());
    for (std::size_t i = 0; i < data_dim; ++i) in[i] = x_t[i];
    time_embedding(t, std::span<double>(in).subspan(data_dim, time_embed_dim));
    condition_embedding(cond,
                        std::span<double>(in).subspan(data_dim + time_embed_dim, class_embed_dim));
    return in;
  }

  // One raw network evaluation (no guidance combination).
  std::vector<double> predict_raw(std::span<const double> x_t, std::size_t t,
                                  const CondLabel& cond) const {
    ++net_evals;
    return net_forward(net, assemble_input(x_t, t, cond));
  }
};

// Classifier-free guidance: eps_hat = (1 + w) eps_cond - w eps_uncond. The
// unconditional branch is skipped when it cannot contribute (w = 0 or a null
// condition), so callers can count network evaluations exactly.
inline std::vector<double> predict_eps(const Denoiser& d, std::span<const double> x_t,
                                       std::size_t t, const CondLabel& cond, double w) {
  if (t < 1) throw std::invalid_argument("predict_eps: t must be >= 1");
  if (!cond.cls) return d.predict_raw(x_t, t, CondLabel::none());
  if (w == 0.0) return d.predict_raw(x_t, t, cond);
  std::vector<double> eps_cond = d.predict_raw(x_t, t, cond);
  const std::vector<double> eps_uncond = d.predict_raw(x_t, t, CondLabel::none());
  for (std::size_t i = 0; i < eps_cond.size(); ++i)
    eps_cond[i] = (1.0 + w) * eps_cond[i] - w * eps_uncond[i];
  return eps_cond;
}

}  // namespace genie
