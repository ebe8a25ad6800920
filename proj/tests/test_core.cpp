#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "genie/adam.hpp"
#include "genie/net.hpp"
#include "genie/rng.hpp"

using namespace genie;

namespace {

// Scalar objective used by the finite-difference oracle.
double objective(const Net& net, const std::vector<double>& x, const std::vector<double>& up) {
  const std::vector<double> out = net_forward(net, x);
  double acc = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) acc += up[i] * out[i];
  return acc;
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(a) + std::abs(b), 1e-6);
}

// Central finite differences against every parameter and the input.
double max_grad_rel_err(Net net, std::vector<double> x, const std::vector<double>& up,
                        double h = 1e-4) {
  const NetGrads g = net_grad(net, x, up);
  double worst = 0.0;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    for (std::size_t i = 0; i < net.layers[l].w.data.size(); ++i) {
      double& p = net.layers[l].w.data[i];
      const double saved = p;
      p = saved + h;
      const double hi = objective(net, x, up);
      p = saved - h;
      const double lo = objective(net, x, up);
      p = saved;
      worst = std::max(worst, rel_err(g.dw[l].data[i], (hi - lo) / (2 * h)));
    }
    for (std::size_t i = 0; i < net.layers[l].b.size(); ++i) {
      double& p = net.layers[l].b[i];
      const double saved = p;
      p = saved + h;
      const double hi = objective(net, x, up);
      p = saved - h;
      const double lo = objective(net, x, up);
      p = saved;
      worst = std::max(worst, rel_err(g.db[l][i], (hi - lo) / (2 * h)));
    }
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double hi = objective(net, x, up);
    x[i] = saved - h;
    const double lo = objective(net, x, up);
    x[i] = saved;
    worst = std::max(worst, rel_err(g.dx[i], (hi - lo) / (2 * h)));
  }
  return worst;
}

}  // namespace

TEST_CASE("zero-initialized final layer maps everything to zero") {
  const Net net = make_mlp(3, {8}, 2, RngStream(1), /*zero_last=*/true);
  RngStream rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    const std::vector<double> out = net_forward(net, rng.gaussians(3));
    for (double v : out) CHECK(v == 0.0);
  }
}

TEST_CASE("identity affine layer passes input through") {
  Net net;
  Layer layer;
  layer.w = Matrix(3, 3);
  for (std::size_t i = 0; i < 3; ++i) layer.w(i, i) = 1.0;
  layer.b.assign(3, 0.0);
  layer.act = Activation::identity;
  net.layers.push_back(layer);
  const std::vector<double> x = {0.5, -1.25, 3.0};
  CHECK(net_forward(net, x) == x);
}

TEST_CASE("fixed 2-layer net matches the hand-computed product") {
  // out = W2 (W1 x + b1) + b2 with identity activations, x = (1, -1):
  // W1 x + b1 = (-0.5, -1.5); out = (2*-0.5, -0.5 - 1.5 + 1) = (-1, -1).
  Net net;
  Layer l1;
  l1.w = Matrix(2, 2);
  l1.w(0, 0) = 1;
  l1.w(0, 1) = 2;
  l1.w(1, 0) = 3;
  l1.w(1, 1) = 4;
  l1.b = {0.5, -0.5};
  l1.act = Activation::identity;
  Layer l2;
  l2.w = Matrix(2, 2);
  l2.w(0, 0) = 2;
  l2.w(0, 1) = 0;
  l2.w(1, 0) = 1;
  l2.w(1, 1) = 1;
  l2.b = {0.0, 1.0};
  l2.act = Activation::identity;
  net.layers = {l1, l2};
  const std::vector<double> out = net_forward(net, std::vector<double>{1.0, -1.0});
  CHECK(out[0] == Catch::Approx(-1.0).margin(1e-12));
  CHECK(out[1] == Catch::Approx(-1.0).margin(1e-12));
}

TEST_CASE("net_forward rejects dimension mismatch") {
  const Net net = make_mlp(3, {4}, 2, RngStream(1));
  CHECK_THROWS_AS(net_forward(net, std::vector<double>{1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(net_grad(net, std::vector<double>{1.0, 2.0, 3.0}, std::vector<double>{1.0}),
                  std::invalid_argument);
}

TEST_CASE("zero upstream yields zero gradients") {
  const Net net = make_mlp(4, {6}, 3, RngStream(3));
  const NetGrads g = net_grad(net, std::vector<double>{1, 2, 3, 4}, std::vector<double>{0, 0, 0});
  for (const auto& m : g.dw)
    for (double v : m.data) CHECK(v == 0.0);
  for (const auto& b : g.db)
    for (double v : b) CHECK(v == 0.0);
  for (double v : g.dx) CHECK(v == 0.0);
}

TEST_CASE("linear net input gradient equals W^T upstream") {
  Net net;
  Layer layer;
  layer.w = Matrix(2, 3);
  double w = 0.5;
  for (auto& v : layer.w.data) v = (w += 0.25);
  layer.b.assign(2, 0.0);
  layer.act = Activation::identity;
  net.layers.push_back(layer);
  const std::vector<double> up = {2.0, -1.0};
  const NetGrads g = net_grad(net, std::vector<double>{0.1, 0.2, 0.3}, up);
  for (std::size_t j = 0; j < 3; ++j) {
    const double expect = layer.w(0, j) * up[0] + layer.w(1, j) * up[1];
    CHECK(g.dx[j] == Catch::Approx(expect).margin(1e-12));
  }
}

TEST_CASE("reverse-mode gradients match central finite differences") {
  RngStream rng(77);
  const Net net = make_mlp(3, {5, 4}, 2, RngStream(11));
  const std::vector<double> x = rng.gaussians(3);
  const std::vector<double> up = rng.gaussians(2);
  CHECK(max_grad_rel_err(net, x, up) < 1e-4);
}

TEST_CASE("adam leaves params unchanged on zero gradients from a fresh state") {
  AdamState adam({.lr = 0.1});
  std::vector<double> p = {1.5, -2.5};
  const std::vector<double> g = {0.0, 0.0};
  adam.step({std::span<double>(p)}, {std::span<const double>(g)});
  CHECK(p[0] == 1.5);
  CHECK(p[1] == -2.5);
}

TEST_CASE("first adam step moves a scalar by about lr") {
  // Bias correction makes mhat = g, vhat = g^2, so step 1 is lr * sign(g).
  AdamState adam({.lr = 0.1});
  std::vector<double> p = {2.0};
  const std::vector<double> g = {1.0};
  adam.step({std::span<double>(p)}, {std::span<const double>(g)});
  CHECK(p[0] == Catch::Approx(1.9).epsilon(1e-6));
  CHECK(adam.step_count() == 1);
}

TEST_CASE("adam drives p^2 near zero in 200 steps") {
  // Reference oracle: plain gradient descent with lr 0.01 ends at
  // (1 - 0.02)^200 = 0.0176 < 0.05; adam must do at least as well.
  double p_gd = 1.0;
  for (int i = 0; i < 200; ++i) p_gd -= 0.01 * 2.0 * p_gd;
  REQUIRE(std::abs(p_gd) < 0.05);

  AdamState adam({.lr = 0.02});
  std::vector<double> p = {1.0};
  for (int i = 0; i < 200; ++i) {
    const std::vector<double> g = {2.0 * p[0]};
    adam.step({std::span<double>(p)}, {std::span<const double>(g)});
    REQUIRE(std::isfinite(p[0]));
  }
  CHECK(std::abs(p[0]) < 0.05);
}

TEST_CASE("adam rejects NaN gradients") {
  AdamState adam;
  std::vector<double> p = {1.0};
  const std::vector<double> g = {std::nan("")};
  CHECK_THROWS_AS(adam.step({std::span<double>(p)}, {std::span<const double>(g)}), NumericError);
}
