#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "genie/errors.hpp"

namespace genie {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction over a list of parameter tensors. Moment buffers
// mirror the parameter shapes and are allocated on the first step.
class AdamState {
 public:
  explicit AdamState(AdamConfig cfg = {}) : cfg_(cfg) {}

  const AdamConfig& config() const { return cfg_; }
  std::uint64_t step_count() const { return step_; }

  void step(const std::vector<std::span<double>>& params,
            const std::vector<std::span<const double>>& grads) {
    if (params.size() != grads.size())
      throw std::invalid_argument("adam: params/grads tensor count mismatch");
    if (m_.empty()) {
      m_.resize(params.size());
      v_.resize(params.size());
      for (std::size_t k = 0; k < params.size(); ++k) {
        m_[k].assign(params[k].size(), 0.0);
        v_[k].assign(params[k].size(), 0.0);
      }
    }
    if (m_.size() != params.size())
      throw std::invalid_argument("adam: tensor count changed between steps");

    for (std::size_t k = 0; k < grads.size(); ++k) {
      if (params[k].size() != grads[k].size() || params[k].size() != m_[k].size())
        throw std::invalid_argument("adam: tensor shape mismatch");
      for (double g : grads[k])
        if (!std::isfinite(g)) throw NumericError("adam: non-finite gradient");
    }

    ++step_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (std::size_t k = 0; k < params.size(); ++k) {
      auto p = params[k];
      auto g = grads[k];
      auto& m = m_[k];
      auto& v = v_[k];
      for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
        v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
        const double mhat = m[i] / c1;
        const double vhat = v[i] / c2;
        p[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
      }
    }
  }

 private:
  AdamConfig cfg_;
  std::uint64_t step_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace genie
