#pragma once

// Central finite-difference gradient checking. The numeric side always runs
// in double precision on a copy of the network.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>

#include "styleaug/nn/network.hpp"

namespace styleaug::nn {

struct GradcheckReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // elements whose perturbation crossed a relu/maxpool switch
};

struct GradcheckOptions {
  double epsilon = 1e-3;
  std::uint64_t seed = 0;
  std::size_t max_checks_per_tensor = 0;  // 0 checks every element
};

/// Analytic parameter gradients of sum(projection * output).
using AnalyticGradFn = std::function<ParamSet(const Network&, const Tensor& input, const Tensor& projection)>;

inline ParamSet backprop_param_grads(const Network& net, const Tensor& input, const Tensor& projection) {
  auto fwd = forward(net, input);
  return backward(net, fwd.trace, projection).param_grads;
}

inline double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

/// Hash of every relu sign pattern and maxpool selection in a traced pass.
template <typename T>
std::uint64_t activation_signature(const BasicNetwork<T>& net, const Trace<T>& trace) {
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    if (net.layers[i].kind == LayerKind::Relu) {
      for (auto v : trace.inputs[i].storage()) {
        const unsigned char bit = v > T(0);
        h = hash_bytes(&bit, 1, h);
      }
    } else if (net.layers[i].kind == LayerKind::MaxPool) {
      h = hash_bytes(trace.argmax[i].data(), trace.argmax[i].size() * sizeof(int), h);
    }
  }
  return h;
}

inline GradcheckReport gradcheck(const Network& net, const Tensor& input, const GradcheckOptions& opts = {},
                                 const AnalyticGradFn& analytic = backprop_param_grads) {
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const Shape out_shape = net.batch_output_shape(input.dim(0));
  BasicTensor<double> projection(out_shape);
  for (auto& v : projection.storage()) v = unit(rng);
  const ParamSet grads = analytic(net, input, projection.cast<float>());

  BasicNetwork<double> probe = net.cast<double>();
  const BasicTensor<double> x = input.cast<double>();
  auto evaluate = [&](std::uint64_t& signature) {
    auto fwd = forward(probe, x);
    signature = activation_signature(probe, fwd.trace);
    return std::inner_product(fwd.output.storage().begin(), fwd.output.storage().end(),
                              projection.storage().begin(), 0.0);
  };

  GradcheckReport report;
  for (std::size_t l = 0; l < probe.params.size(); ++l)
    for (std::size_t p = 0; p < probe.params[l].size(); ++p) {
      auto& tensor = probe.params[l][p];
      std::vector<std::size_t> order(tensor.size());
      std::iota(order.begin(), order.end(), 0);
      if (opts.max_checks_per_tensor && order.size() > opts.max_checks_per_tensor) {
        std::shuffle(order.begin(), order.end(), rng);
        order.resize(opts.max_checks_per_tensor);
      }
      for (std::size_t k : order) {
        const double saved = tensor[k];
        std::uint64_t sig_plus = 0, sig_minus = 0;
        tensor[k] = saved + opts.epsilon;
        const double plus = evaluate(sig_plus);
        tensor[k] = saved - opts.epsilon;
        const double minus = evaluate(sig_minus);
        tensor[k] = saved;
        if (sig_plus != sig_minus) {
          ++report.skipped;
          continue;
        }
        const double numeric = (plus - minus) / (2.0 * opts.epsilon);
        report.max_rel_error = std::max(report.max_rel_error, relative_error(grads[l][p][k], numeric));
        ++report.checked;
      }
    }
  return report;
}

/// Central-difference gradient of a scalar function of a double tensor.
inline BasicTensor<double> numeric_gradient(const std::function<double(const BasicTensor<double>&)>& f,
                                            BasicTensor<double> x, double epsilon) {
  BasicTensor<double> g(x.shape());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double saved = x[k];
    x[k] = saved + epsilon;
    const double plus = f(x);
    x[k] = saved - epsilon;
    const double minus = f(x);
    x[k] = saved;
    g[k] = (plus - minus) / (2.0 * epsilon);
  }
  return g;
}

}  // namespace styleaug::nn
