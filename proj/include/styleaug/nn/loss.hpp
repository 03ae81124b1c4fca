#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

#include "styleaug/nn/tensor.hpp"

namespace styleaug::nn {

/// A scalar loss and its gradient with respect to the first argument.
template <typename T>
struct LossResult {
  double value = 0.0;
  BasicTensor<T> grad;
};

/// Mean over the batch of -log softmax(logits)[label], weighted per sample.
/// `weights` may be empty (all ones). Gradients are scaled by 1/B.
template <typename T>
LossResult<T> weighted_cross_entropy(const BasicTensor<T>& logits, std::span<const int> labels,
                                     std::span<const double> weights) {
  if (logits.rank() != 2) throw ShapeError("cross_entropy expects [batch x classes] logits");
  const int batch = logits.dim(0), classes = logits.dim(1);
  if (classes < 2) throw std::invalid_argument("cross_entropy needs at least two classes");
  if (static_cast<int>(labels.size()) != batch) throw ShapeError("cross_entropy: one label per row required");
  LossResult<T> r;
  r.grad = BasicTensor<T>(logits.shape());
  for (int b = 0; b < batch; ++b) {
    const int y = labels[b];
    if (y < 0 || y >= classes)
      throw std::out_of_range("label " + std::to_string(y) + " outside [0, " + std::to_string(classes) + ")");
    const double w = weights.empty() ? 1.0 : weights[b];
    const T* z = logits.ptr() + static_cast<std::size_t>(b) * classes;
    double zmax = z[0];
    for (int k = 1; k < classes; ++k) zmax = std::max<double>(zmax, z[k]);
    double sum = 0.0;
    for (int k = 0; k < classes; ++k) sum += std::exp(static_cast<double>(z[k]) - zmax);
    const double log_norm = zmax + std::log(sum);
    r.value += w * (log_norm - z[y]);
    T* g = r.grad.ptr() + static_cast<std::size_t>(b) * classes;
    for (int k = 0; k < classes; ++k) {
      const double prob = std::exp(static_cast<double>(z[k]) - log_norm);
      g[k] = static_cast<T>(w * (prob - (k == y ? 1.0 : 0.0)) / batch);
    }
  }
  r.value /= batch;
  return r;
}

template <typename T>
LossResult<T> cross_entropy(const BasicTensor<T>& logits, std::span<const int> labels) {
  return weighted_cross_entropy<T>(logits, labels, {});
}

/// lambda * CE(logits, y_i) + (1 - lambda) * CE(logits, y_j), batch-averaged.
template <typename T>
LossResult<T> mixed_cross_entropy(const BasicTensor<T>& logits, std::span<const int> labels_i,
                                  std::span<const int> labels_j, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("mixing weight must lie in [0, 1]");
  LossResult<T> a = cross_entropy(logits, labels_i);
  LossResult<T> b = cross_entropy(logits, labels_j);
  LossResult<T> r;
  r.value = lambda * a.value + (1.0 - lambda) * b.value;
  r.grad = BasicTensor<T>(logits.shape());
  const T li = static_cast<T>(lambda), lj = static_cast<T>(1.0 - lambda);
  for (std::size_t k = 0; k < r.grad.size(); ++k) r.grad[k] = li * a.grad[k] + lj * b.grad[k];
  return r;
}

/// Mean squared error; gradient is with respect to `a`.
template <typename T>
LossResult<T> mse(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape(a, b, "mse");
  LossResult<T> r;
  r.grad = BasicTensor<T>(a.shape());
  const double n = static_cast<double>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    r.value += d * d;
    r.grad[i] = static_cast<T>(2.0 * d / n);
  }
  r.value /= n;
  return r;
}

/// Index of the largest logit per row.
template <typename T>
std::vector<int> argmax_rows(const BasicTensor<T>& logits) {
  std::vector<int> out(logits.dim(0));
  const int classes = logits.dim(1);
  for (int b = 0; b < logits.dim(0); ++b) {
    const T* z = logits.ptr() + static_cast<std::size_t>(b) * classes;
    out[b] = static_cast<int>(std::max_element(z, z + classes) - z);
  }
  return out;
}

}  // namespace styleaug::nn
