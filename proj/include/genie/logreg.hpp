#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "genie/mat.hpp"
#include "genie/sample.hpp"

namespace genie {

// Training example with a soft target distribution (hard labels are a
// one-entry special case; mixed samples carry two entries).
struct TrainExample {
  std::vector<double> x;
  std::vector<std::pair<int, double>> targets;
};

inline TrainExample hard_example(const LabeledSample& s) { return {s.x, {{s.y, 1.0}}}; }

struct LogRegHead {
  Matrix w;  // n_classes x dim
  std::vector<double> b;
  std::size_t trained_on = 0;
  std::vector<double> loss_seq;  // per accepted iteration, non-increasing

  std::size_t n_classes() const { return w.rows; }
};

inline std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  const double m = *std::max_element(p.begin(), p.end());
  double z = 0.0;
  for (auto& v : p) {
    v = std::exp(v - m);
    z += v;
  }
  for (auto& v : p) v /= z;
  return p;
}

inline std::vector<double> logreg_probs(const LogRegHead& head, std::span<const double> x) {
  std::vector<double> logits(head.w.rows, 0.0);
  matvec(head.w, x, logits);
  for (std::size_t k = 0; k < logits.size(); ++k) logits[k] += head.b[k];
  return softmax(logits);
}

// Ties break toward the lowest class index.
inline int argmax_index(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return static_cast<int>(best);
}

inline int logreg_predict(const LogRegHead& head, std::span<const double> x) {
  return argmax_index(logreg_probs(head, x));
}

namespace detail {

inline double logreg_loss(const Matrix& w, const std::vector<double>& b,
                          std::span<const TrainExample> data, double l2) {
  double loss = 0.0;
  std::vector<double> logits(w.rows);
  for (const auto& ex : data) {
    logits.assign(w.rows, 0.0);
    matvec(w, ex.x, logits);
    for (std::size_t k = 0; k < logits.size(); ++k) logits[k] += b[k];
    const double m = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double v : logits) z += std::exp(v - m);
    const double logz = std::log(z) + m;
    for (const auto& [cls, weight] : ex.targets)
      loss -= weight * (logits[static_cast<std::size_t>(cls)] - logz);
  }
  loss /= static_cast<double>(data.size());
  return loss + l2 * squared_norm(w.data);
}

}  // namespace detail

// Multinomial logistic regression by full-batch gradient descent with
// backtracking: the step is halved until the loss does not increase, which
// makes the recorded loss sequence non-increasing by construction.
inline LogRegHead fit_logreg(std::span<const TrainExample> data, std::size_t n_classes,
                             double l2 = 1e-3, std::size_t steps = 500, double lr = 0.5) {
  if (data.empty()) throw std::invalid_argument("fit_logreg: empty training set");
  std::vector<double> class_mass(n_classes, 0.0);
  for (const auto& ex : data)
    for (const auto& [cls, weight] : ex.targets) {
      if (cls < 0 || static_cast<std::size_t>(cls) >= n_classes)
        throw std::invalid_argument("fit_logreg: label outside [0, n_classes)");
      class_mass[static_cast<std::size_t>(cls)] += weight;
    }
  for (std::size_t c = 0; c < n_classes; ++c)
    if (class_mass[c] <= 0.0)
      throw std::invalid_argument("fit_logreg: class " + std::to_string(c) +
                                  " missing from train set");

  const std::size_t dim = data.front().x.size();
  LogRegHead head;
  head.w = Matrix(n_classes, dim);
  head.b.assign(n_classes, 0.0);
  head.trained_on = data.size();

  Matrix gw(n_classes, dim);
  std::vector<double> gb(n_classes);
  std::vector<double> logits(n_classes);
  double cur_loss = detail::logreg_loss(head.w, head.b, data, l2);
  head.loss_seq.push_back(cur_loss);

  for (std::size_t it = 0; it < steps; ++it) {
    gw.fill(0.0);
    gb.assign(n_classes, 0.0);
    const double inv_n = 1.0 / static_cast<double>(data.size());
    for (const auto& ex : data) {
      logits.assign(n_classes, 0.0);
      matvec(head.w, ex.x, logits);
      for (std::size_t k = 0; k < n_classes; ++k) logits[k] += head.b[k];
      std::vector<double> p = softmax(logits);
      for (const auto& [cls, weight] : ex.targets) p[static_cast<std::size_t>(cls)] -= weight;
      for (auto& v : p) v *= inv_n;
      outer_add(gw, p, ex.x);
      axpy(1.0, p, gb);
    }
    axpy(2.0 * l2, head.w.data, gw.data);

    // Backtracking line search on the accepted step.
    Matrix w_try = head.w;
    std::vector<double> b_try = head.b;
    bool accepted = false;
    while (lr >= 1e-14) {
      w_try = head.w;
      b_try = head.b;
      axpy(-lr, gw.data, w_try.data);
      axpy(-lr, gb, b_try);
      const double trial = detail::logreg_loss(w_try, b_try, data, l2);
      if (trial <= cur_loss) {
        head.w = std::move(w_try);
        head.b = std::move(b_try);
        cur_loss = trial;
        accepted = true;
        break;
      }
      lr *= 0.5;
    }
    if (!accepted) break;  // step underflowed; already at a flat point
    head.loss_seq.push_back(cur_loss);
  }
  return head;
}

inline LogRegHead fit_logreg(std::span<const LabeledSample> data, std::size_t n_classes,
                             double l2 = 1e-3, std::size_t steps = 500, double lr = 0.5) {
  std::vector<TrainExample> examples;
  examples.reserve(data.size());
  for (const auto& s : data) examples.push_back(hard_example(s));
  return fit_logreg(examples, n_classes, l2, steps, lr);
}

}  // namespace genie
