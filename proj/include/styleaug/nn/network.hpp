#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "styleaug/nn/kernels.hpp"
#include "styleaug/nn/layer.hpp"
#include "styleaug/nn/tensor.hpp"

namespace styleaug::nn {

/// Parameters grouped per layer: {weight, bias} for conv/linear, empty otherwise.
template <typename T>
using BasicParamSet = std::vector<std::vector<BasicTensor<T>>>;
using ParamSet = BasicParamSet<float>;

/// A sequential network with optional tap points exposing intermediate activations.
template <typename T>
struct BasicNetwork {
  Shape input_shape;  // per-sample shape, batch dimension excluded
  std::vector<LayerSpec> layers;
  BasicParamSet<T> params;
  std::vector<int> tap_points;  // indices of layers whose outputs are exposed

  BasicNetwork() = default;
  explicit BasicNetwork(Shape per_sample_input) : input_shape(std::move(per_sample_input)) {}

  /// Appends a layer, checking it composes with the current output shape.
  BasicNetwork& add(const LayerSpec& spec) {
    output_shape(spec, sample_output_shape());
    layers.push_back(spec);
    std::vector<BasicTensor<T>> p;
    for (const Shape& s : param_shapes(spec)) p.emplace_back(s);
    params.push_back(std::move(p));
    return *this;
  }

  /// Marks the most recently added layer's output as a tap point.
  BasicNetwork& tap() {
    tap_points.push_back(static_cast<int>(layers.size()) - 1);
    return *this;
  }

  /// Output shape for a single-item batch.
  Shape sample_output_shape() const { return batch_output_shape(1); }

  Shape batch_output_shape(int batch) const {
    Shape s{batch};
    s.insert(s.end(), input_shape.begin(), input_shape.end());
    for (const auto& l : layers) s = output_shape(l, s);
    return s;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : params)
      for (const auto& t : layer) n += t.size();
    return n;
  }

  template <typename U>
  BasicNetwork<U> cast() const {
    BasicNetwork<U> out(input_shape);
    out.layers = layers;
    out.tap_points = tap_points;
    for (const auto& layer : params) {
      std::vector<BasicTensor<U>> p;
      for (const auto& t : layer) p.push_back(t.template cast<U>());
      out.params.push_back(std::move(p));
    }
    return out;
  }
};

using Network = BasicNetwork<float>;

/// Kaiming-uniform (fan-in, ReLU gain) weights and zero biases.
template <typename T>
void kaiming_init(BasicNetwork<T>& net, std::mt19937_64& rng) {
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    if (!net.layers[i].has_params()) continue;
    const double bound = std::sqrt(6.0 / fan_in(net.layers[i]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& v : net.params[i][0].storage()) v = static_cast<T>(dist(rng));
    net.params[i][1].fill(T(0));
  }
}

template <typename T>
BasicParamSet<T> zeros_like(const BasicParamSet<T>& params) {
  BasicParamSet<T> out;
  for (const auto& layer : params) {
    std::vector<BasicTensor<T>> g;
    for (const auto& t : layer) g.emplace_back(t.shape());
    out.push_back(std::move(g));
  }
  return out;
}

/// FNV-1a over every parameter buffer, in layer order.
template <typename T>
std::uint64_t parameter_hash(const BasicParamSet<T>& params) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& layer : params)
    for (const auto& t : layer) h = hash_bytes(t.ptr(), t.size() * sizeof(T), h);
  return h;
}

/// Intermediates retained by a forward pass for the matching backward pass.
template <typename T>
struct Trace {
  bool valid = false;
  std::vector<BasicTensor<T>> inputs;  // inputs[i] is the input of layer i
  std::vector<BasicTensor<T>> cols;    // im2col buffers for conv layers
  std::vector<std::vector<int>> argmax;
  Shape output_shape;
};

template <typename T>
struct ForwardResult {
  BasicTensor<T> output;
  std::vector<BasicTensor<T>> taps;  // one per tap point, in tap order
  Trace<T> trace;
};

template <typename T>
struct BackwardResult {
  BasicParamSet<T> param_grads;  // empty when parameter gradients were not requested
  BasicTensor<T> input_grad;     // empty when the input gradient was not requested
};

struct BackwardOptions {
  bool param_grads = true;
  bool input_grad = false;
};

/// Runs `input` ([B, ...input_shape]) through the network.
template <typename T>
ForwardResult<T> forward(const BasicNetwork<T>& net, const BasicTensor<T>& input, bool keep_trace = true) {
  if (input.rank() != static_cast<int>(net.input_shape.size()) + 1 ||
      !std::equal(net.input_shape.begin(), net.input_shape.end(), input.shape().begin() + 1))
    throw ShapeError("network expects input " + shape_str(net.input_shape) + " per sample, got " +
                     shape_str(input.shape()));
  const std::size_t n = net.layers.size();
  ForwardResult<T> result;
  Trace<T>& tr = result.trace;
  if (keep_trace) {
    tr.inputs.resize(n);
    tr.cols.resize(n);
    tr.argmax.resize(n);
  }
  result.taps.resize(net.tap_points.size());
  BasicTensor<T> x = input;
  for (std::size_t i = 0; i < n; ++i) {
    const LayerSpec& s = net.layers[i];
    BasicTensor<T> y;
    switch (s.kind) {
      case LayerKind::Conv:
        kernels::conv_forward(s, x, net.params[i][0], net.params[i][1], y, keep_trace ? &tr.cols[i] : nullptr);
        break;
      case LayerKind::Linear:
        kernels::linear_forward(s, x, net.params[i][0], net.params[i][1], y);
        break;
      case LayerKind::Relu:
        kernels::relu_forward(x, y);
        break;
      case LayerKind::MaxPool:
        kernels::maxpool_forward(s, x, y, keep_trace ? &tr.argmax[i] : nullptr);
        break;
      case LayerKind::Upsample:
        kernels::upsample_forward(s, x, y);
        break;
      case LayerKind::Flatten:
        y = x.reshaped(output_shape(s, x.shape()));
        break;
    }
    for (std::size_t k = 0; k < net.tap_points.size(); ++k)
      if (net.tap_points[k] == static_cast<int>(i)) {
        require_finite(y, "layer " + std::to_string(i) + " (" + to_string(s.kind) + ")");
        result.taps[k] = y;
      }
    if (keep_trace) tr.inputs[i] = std::move(x);
    x = std::move(y);
  }
  require_finite(x, "network output");
  tr.output_shape = x.shape();
  result.output = std::move(x);
  tr.valid = keep_trace;
  return result;
}

/// Reverse-mode pass. `tap_grads` (one per tap point, empty entries allowed)
/// are added to the gradient flowing through the corresponding activations.
template <typename T>
BackwardResult<T> backward(const BasicNetwork<T>& net, const Trace<T>& trace, const BasicTensor<T>& upstream,
                           std::span<const BasicTensor<T>> tap_grads = {}, BackwardOptions opts = {}) {
  if (!trace.valid) throw std::logic_error("backward called without a retained forward pass");
  if (!tap_grads.empty() && tap_grads.size() != net.tap_points.size())
    throw ShapeError("backward: expected one tap gradient per tap point");
  if (upstream.shape() != trace.output_shape)
    throw ShapeError("backward: upstream gradient " + shape_str(upstream.shape()) + " does not match output " +
                     shape_str(trace.output_shape));
  const std::size_t n = net.layers.size();
  BackwardResult<T> result;
  if (opts.param_grads) result.param_grads = zeros_like(net.params);
  BasicTensor<T> g = upstream;
  for (std::size_t ii = n; ii-- > 0;) {
    for (std::size_t k = 0; k < tap_grads.size(); ++k) {
      if (net.tap_points[k] != static_cast<int>(ii) || tap_grads[k].empty()) continue;
      require_same_shape(g, tap_grads[k], "tap gradient");
      for (std::size_t e = 0; e < g.size(); ++e) g[e] += tap_grads[k][e];
    }
    const bool need_dx = ii > 0 || opts.input_grad;
    const LayerSpec& s = net.layers[ii];
    const BasicTensor<T>& x = trace.inputs[ii];
    BasicTensor<T> dx;
    switch (s.kind) {
      case LayerKind::Conv:
        kernels::conv_backward(s, x.shape(), trace.cols[ii], net.params[ii][0], g,
                               opts.param_grads ? &result.param_grads[ii][0] : nullptr,
                               opts.param_grads ? &result.param_grads[ii][1] : nullptr, need_dx ? &dx : nullptr);
        break;
      case LayerKind::Linear:
        kernels::linear_backward(s, x, net.params[ii][0], g, opts.param_grads ? &result.param_grads[ii][0] : nullptr,
                                 opts.param_grads ? &result.param_grads[ii][1] : nullptr, need_dx ? &dx : nullptr);
        break;
      case LayerKind::Relu:
        kernels::relu_backward(x, g, dx);
        break;
      case LayerKind::MaxPool:
        kernels::maxpool_backward(x.shape(), trace.argmax[ii], g, dx);
        break;
      case LayerKind::Upsample:
        kernels::upsample_backward(s, x.shape(), g, dx);
        break;
      case LayerKind::Flatten:
        dx = g.reshaped(x.shape());
        break;
    }
    if (!need_dx) break;
    g = std::move(dx);
  }
  if (opts.param_grads)
    for (const auto& layer : result.param_grads)
      for (const auto& t : layer) require_finite(t, "parameter gradients");
  if (opts.input_grad) {
    require_finite(g, "input gradient");
    result.input_grad = std::move(g);
  }
  return result;
}

}  // namespace styleaug::nn
