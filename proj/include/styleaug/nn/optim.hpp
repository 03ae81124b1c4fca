#pragma once

#include <cmath>

#include "styleaug/nn/network.hpp"

namespace styleaug::nn {

/// SGD with momentum. Weight decay is folded into the gradient before the
/// momentum buffer: v <- m*v + (g + wd*w); w <- w - lr*v.
struct OptimizerState {
  float learning_rate = 0.001f;
  float momentum = 0.9f;
  float weight_decay = 0.0f;
  ParamSet velocity;  // lazily shaped like the parameters on first step
};

inline void check_matching(const ParamSet& a, const ParamSet& b, const char* what) {
  if (a.size() != b.size()) throw ShapeError(std::string(what) + ": layer count mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size()) throw ShapeError(std::string(what) + ": parameter count mismatch");
    for (std::size_t j = 0; j < a[i].size(); ++j) require_same_shape(a[i][j], b[i][j], what);
  }
}

inline void sgd_step(ParamSet& params, const ParamSet& grads, OptimizerState& state) {
  check_matching(params, grads, "sgd_step");
  if (state.velocity.empty()) state.velocity = zeros_like(params);
  check_matching(params, state.velocity, "sgd_step velocity");
  const float m = state.momentum, lr = state.learning_rate, wd = state.weight_decay;
  for (std::size_t i = 0; i < params.size(); ++i)
    for (std::size_t j = 0; j < params[i].size(); ++j) {
      float* w = params[i][j].ptr();
      const float* g = grads[i][j].ptr();
      float* v = state.velocity[i][j].ptr();
      for (std::size_t k = 0; k < params[i][j].size(); ++k) {
        v[k] = m * v[k] + (g[k] + wd * w[k]);
        w[k] -= lr * v[k];
      }
    }
}

/// Adam, used for the style decoder.
struct AdamState {
  float learning_rate = 1e-4f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float epsilon = 1e-8f;
  long step = 0;
  ParamSet first_moment;
  ParamSet second_moment;
};

inline void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state) {
  check_matching(params, grads, "adam_step");
  if (state.first_moment.empty()) {
    state.first_moment = zeros_like(params);
    state.second_moment = zeros_like(params);
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  const float step_size = static_cast<float>(state.learning_rate * std::sqrt(c2) / c1);
  for (std::size_t i = 0; i < params.size(); ++i)
    for (std::size_t j = 0; j < params[i].size(); ++j) {
      float* w = params[i][j].ptr();
      const float* g = grads[i][j].ptr();
      float* m = state.first_moment[i][j].ptr();
      float* v = state.second_moment[i][j].ptr();
      for (std::size_t k = 0; k < params[i][j].size(); ++k) {
        m[k] = state.beta1 * m[k] + (1.0f - state.beta1) * g[k];
        v[k] = state.beta2 * v[k] + (1.0f - state.beta2) * g[k] * g[k];
        w[k] -= step_size * m[k] / (std::sqrt(v[k]) + state.epsilon);
      }
    }
}

}  // namespace styleaug::nn
