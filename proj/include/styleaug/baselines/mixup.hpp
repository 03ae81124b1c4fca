#pragma once

#include <vector>

#include "styleaug/nn/loss.hpp"
#include "styleaug/nn/tensor.hpp"
#include "styleaug/random.hpp"

namespace styleaug::baselines {

inline constexpr double kDefaultGamma = 0.4;

enum class MixupLevel { Pixel, Feature };

/// Beta(gamma, gamma) draw; gamma == 0 returns exactly 1 (no mixing).
double sample_mixup_lambda(double gamma, Rng& rng);

/// lambda * x_i + (1 - lambda) * x_j.
nn::Tensor mixup_pixel(const nn::Tensor& x_i, const nn::Tensor& x_j, double lambda);
nn::Tensor mixup_feature(const nn::Tensor& f_i, const nn::Tensor& f_j, double lambda);

/// Partner index for every batch position: a uniform random permutation.
std::vector<int> mixup_permutation(int batch_size, Rng& rng);

/// Row b becomes lambda * x[b] + (1 - lambda) * x[perm[b]].
nn::Tensor mix_batch(const nn::Tensor& x, const std::vector<int>& perm, double lambda);

/// Gradient of mix_batch with respect to x, given the gradient of its output.
nn::Tensor mix_batch_backward(const nn::Tensor& grad_out, const std::vector<int>& perm, double lambda);

/// lambda * CE(logits, y_i) + (1 - lambda) * CE(logits, y_j).
inline nn::LossResult<float> mixed_loss(const nn::Tensor& logits, const std::vector<int>& y_i,
                                        const std::vector<int>& y_j, double lambda) {
  return nn::mixed_cross_entropy<float>(logits, y_i, y_j, lambda);
}

}  // namespace styleaug::baselines
