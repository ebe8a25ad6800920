#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "genie/mat.hpp"
#include "genie/rng.hpp"

namespace genie {

enum class Activation { identity, silu };

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }
inline double silu(double z) { return z * sigmoid(z); }
inline double silu_grad(double z) {
  const double s = sigmoid(z);
  return s * (1.0 + z * (1.0 - s));
}

inline double apply_activation(Activation a, double z) {
  return a == Activation::silu ? silu(z) : z;
}
inline double activation_grad(Activation a, double z) {
  return a == Activation::silu ? silu_grad(z) : 1.0;
}

struct Layer {
  Matrix w;                // out x in
  std::vector<double> b;   // out
  Activation act = Activation::identity;
};

// Plain feed-forward stack. All parameters are doubles; forward/backward are
// exact (no stochastic pieces), which keeps finite-difference checks tight.
struct Net {
  std::vector<Layer> layers;

  std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().w.cols; }
  std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().w.rows; }
};

// Uniform fan-in init, one substream per layer; zero_last zeroes the final
// affine layer (the denoiser and classifier heads start from the null map).
inline Net make_mlp(std::size_t input, const std::vector<std::size_t>& hidden, std::size_t output,
                    const RngStream& init_rng, bool zero_last = false,
                    Activation hidden_act = Activation::silu) {
  Net net;
  std::vector<std::size_t> dims;
  dims.push_back(input);
  for (auto h : hidden) dims.push_back(h);
  dims.push_back(output);

  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    RngStream rng = init_rng.child(l);
    Layer layer;
    layer.w = Matrix(dims[l + 1], dims[l]);
    layer.b.assign(dims[l + 1], 0.0);
    layer.act = (l + 2 == dims.size()) ? Activation::identity : hidden_act;
    const bool zero = zero_last && l + 2 == dims.size();
    if (!zero) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(dims[l]));
      for (auto& v : layer.w.data) v = rng.uniform_real(-bound, bound);
      for (auto& v : layer.b) v = rng.uniform_real(-bound, bound);
    }
    net.layers.push_back(std::move(layer));
  }
  return net;
}

struct NetTrace {
  std::vector<std::vector<double>> pre;   // pre-activation per layer
  std::vector<std::vector<double>> post;  // post-activation per layer (post.back() = output)
};

inline std::vector<double> net_forward_traced(const Net& net, std::span<const double> x,
                                              NetTrace& trace) {
  check_dim(x.size() == net.input_dim(), "net_forward: input dimension mismatch");
  trace.pre.resize(net.layers.size());
  trace.post.resize(net.layers.size());
  std::vector<double> cur(x.begin(), x.end());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const Layer& layer = net.layers[l];
    trace.pre[l].assign(layer.w.rows, 0.0);
    matvec(layer.w, cur, trace.pre[l]);
    for (std::size_t i = 0; i < layer.b.size(); ++i) trace.pre[l][i] += layer.b[i];
    trace.post[l].resize(layer.w.rows);
    for (std::size_t i = 0; i < trace.pre[l].size(); ++i)
      trace.post[l][i] = apply_activation(layer.act, trace.pre[l][i]);
    cur = trace.post[l];
  }
  return cur;
}

inline std::vector<double> net_forward(const Net& net, std::span<const double> x) {
  NetTrace trace;
  return net_forward_traced(net, x, trace);
}

struct NetGrads {
  std::vector<Matrix> dw;
  std::vector<std::vector<double>> db;
  std::vector<double> dx;

  static NetGrads zeros_like(const Net& net) {
    NetGrads g;
    g.dw.reserve(net.layers.size());
    g.db.reserve(net.layers.size());
    for (const Layer& layer : net.layers) {
      g.dw.emplace_back(layer.w.rows, layer.w.cols);
      g.db.emplace_back(layer.b.size(), 0.0);
    }
    g.dx.assign(net.input_dim(), 0.0);
    return g;
  }
};

// Accumulates exact reverse-mode gradients of <upstream, net(x)> into acc.
// The trace must come from net_forward_traced on the same (net, x).
inline void net_backward_accumulate(const Net& net, std::span<const double> x,
                                    const NetTrace& trace, std::span<const double> upstream,
                                    NetGrads& acc) {
  check_dim(upstream.size() == net.output_dim(), "net_backward: upstream dimension mismatch");
  std::vector<double> delta(upstream.begin(), upstream.end());
  for (std::size_t l = net.layers.size(); l-- > 0;) {
    const Layer& layer = net.layers[l];
    for (std::size_t i = 0; i < delta.size(); ++i)
      delta[i] *= activation_grad(layer.act, trace.pre[l][i]);
    const std::span<const double> input =
        l == 0 ? x : std::span<const double>(trace.post[l - 1]);
    outer_add(acc.dw[l], delta, input);
    axpy(1.0, delta, acc.db[l]);
    std::vector<double> next(layer.w.cols, 0.0);
    matvec_transpose_add(layer.w, delta, next);
    delta = std::move(next);
  }
  axpy(1.0, delta, acc.dx);
}

inline NetGrads net_grad(const Net& net, std::span<const double> x,
                         std::span<const double> upstream) {
  NetTrace trace;
  net_forward_traced(net, x, trace);
  NetGrads g = NetGrads::zeros_like(net);
  net_backward_accumulate(net, x, trace, upstream, g);
  return g;
}

inline bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

inline bool net_finite(const Net& net) {
  for (const Layer& layer : net.layers)
    if (!all_finite(layer.w.data) || !all_finite(layer.b)) return false;
  return true;
}

}  // namespace genie
