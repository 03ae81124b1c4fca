#pragma once

// Channel statistics, adaptive instance normalization and the style-transfer
// losses, with hand-written gradients for each.

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "styleaug/nn/loss.hpp"
#include "styleaug/nn/tensor.hpp"

namespace styleaug::adain {

using nn::BasicTensor;
using nn::ShapeError;

inline constexpr double kDefaultEps = 1e-5;

/// Per-instance, per-channel spatial mean and standard deviation ([B x C] each).
template <typename T>
struct BasicChannelStats {
  BasicTensor<T> mu;
  BasicTensor<T> sigma;
};
using ChannelStats = BasicChannelStats<float>;

namespace detail {
template <typename T>
void require_nchw(const BasicTensor<T>& f, const char* what) {
  if (f.rank() != 4) throw ShapeError(std::string(what) + " expects a [B x C x H x W] feature map");
}
}  // namespace detail

/// mu = spatial mean, sigma = sqrt(population variance + eps).
template <typename T>
BasicChannelStats<T> channel_stats(const BasicTensor<T>& f, double eps = kDefaultEps) {
  detail::require_nchw(f, "channel_stats");
  if (f.dim(2) * f.dim(3) < 1) throw ShapeError("channel_stats: empty spatial extent");
  const int planes = f.dim(0) * f.dim(1);
  const std::size_t n = static_cast<std::size_t>(f.dim(2)) * f.dim(3);
  BasicChannelStats<T> s{BasicTensor<T>({f.dim(0), f.dim(1)}), BasicTensor<T>({f.dim(0), f.dim(1)})};
  for (int p = 0; p < planes; ++p) {
    const T* x = f.ptr() + p * n;
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x[i];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (x[i] - mean) * (x[i] - mean);
    var /= static_cast<double>(n);
    s.mu[p] = static_cast<T>(mean);
    s.sigma[p] = static_cast<T>(std::sqrt(var + eps));
  }
  return s;
}

/// Pulls gradients on (mu, sigma) back to the feature map they were computed from.
template <typename T>
BasicTensor<T> channel_stats_backward(const BasicTensor<T>& f, const BasicChannelStats<T>& stats,
                                      const BasicTensor<T>& dmu, const BasicTensor<T>& dsigma) {
  const int planes = f.dim(0) * f.dim(1);
  const std::size_t n = static_cast<std::size_t>(f.dim(2)) * f.dim(3);
  BasicTensor<T> df(f.shape());
  for (int p = 0; p < planes; ++p) {
    const double mu = stats.mu[p], sigma = stats.sigma[p];
    const double a = dmu[p] / static_cast<double>(n);
    const double b = dsigma[p] / (static_cast<double>(n) * sigma);
    const T* x = f.ptr() + p * n;
    T* g = df.ptr() + p * n;
    for (std::size_t i = 0; i < n; ++i) g[i] = static_cast<T>(a + b * (x[i] - mu));
  }
  return df;
}

/// f_cs = sigma(f_s) * (f_c - mu(f_c)) / sigma(f_c) + mu(f_s). Spatial sizes may differ.
template <typename T>
BasicTensor<T> adain(const BasicTensor<T>& content, const BasicTensor<T>& style, double eps = kDefaultEps) {
  detail::require_nchw(content, "adain");
  detail::require_nchw(style, "adain");
  if (content.dim(1) != style.dim(1)) throw ShapeError("adain: content and style channel counts differ");
  if (content.dim(0) != style.dim(0)) throw ShapeError("adain: content and style batch sizes differ");
  const auto cs = channel_stats(content, eps);
  const auto ss = channel_stats(style, eps);
  const int planes = content.dim(0) * content.dim(1);
  const std::size_t n = static_cast<std::size_t>(content.dim(2)) * content.dim(3);
  BasicTensor<T> out(content.shape());
  for (int p = 0; p < planes; ++p) {
    const double scale = static_cast<double>(ss.sigma[p]) / cs.sigma[p];
    const double mu_c = cs.mu[p], mu_s = ss.mu[p];
    const T* x = content.ptr() + p * n;
    T* y = out.ptr() + p * n;
    for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<T>(scale * (x[i] - mu_c) + mu_s);
  }
  return out;
}

template <typename T>
struct AdainGrads {
  BasicTensor<T> content;
  BasicTensor<T> style;
};

template <typename T>
AdainGrads<T> adain_backward(const BasicTensor<T>& content, const BasicTensor<T>& style,
                             const BasicTensor<T>& grad_out, double eps = kDefaultEps) {
  nn::require_same_shape(content, grad_out, "adain_backward");
  const auto cs = channel_stats(content, eps);
  const auto ss = channel_stats(style, eps);
  const int planes = content.dim(0) * content.dim(1);
  const std::size_t n = static_cast<std::size_t>(content.dim(2)) * content.dim(3);
  AdainGrads<T> g{BasicTensor<T>(content.shape()), {}};
  BasicTensor<T> dmu_s(ss.mu.shape()), dsigma_s(ss.sigma.shape());
  for (int p = 0; p < planes; ++p) {
    const double mu = cs.mu[p], sigma = cs.sigma[p], sigma_s = ss.sigma[p];
    const T* x = content.ptr() + p * n;
    const T* gy = grad_out.ptr() + p * n;
    double sum_g = 0.0, sum_g_xhat = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double xhat = (x[i] - mu) / sigma;
      sum_g += gy[i];
      sum_g_xhat += gy[i] * xhat;
    }
    dmu_s[p] = static_cast<T>(sum_g);
    dsigma_s[p] = static_cast<T>(sum_g_xhat);
    // Instance-norm backward with dxhat = sigma_s * g.
    const double mean_g = sum_g / static_cast<double>(n), mean_g_xhat = sum_g_xhat / static_cast<double>(n);
    T* gx = g.content.ptr() + p * n;
    for (std::size_t i = 0; i < n; ++i) {
      const double xhat = (x[i] - mu) / sigma;
      gx[i] = static_cast<T>(sigma_s / sigma * (gy[i] - mean_g - xhat * mean_g_xhat));
    }
  }
  g.style = channel_stats_backward(style, ss, dmu_s, dsigma_s);
  return g;
}

/// (1 - alpha) * f_c + alpha * f_cs. The endpoints return exact copies.
template <typename T>
BasicTensor<T> interpolate_features(const BasicTensor<T>& content, const BasicTensor<T>& stylized, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  nn::require_same_shape(content, stylized, "interpolate_features");
  if (alpha == 0.0) return content;
  if (alpha == 1.0) return stylized;
  BasicTensor<T> out(content.shape());
  const T a = static_cast<T>(alpha), b = static_cast<T>(1.0 - alpha);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = b * content[i] + a * stylized[i];
  return out;
}

/// Mean squared error between the re-extracted features and the AdaIN target.
template <typename T>
nn::LossResult<T> content_loss(const BasicTensor<T>& reextracted, const BasicTensor<T>& target) {
  return nn::mse(reextracted, target);
}

template <typename T>
struct StyleLossResult {
  double value = 0.0;
  std::vector<BasicTensor<T>> grads;  // with respect to each output tap
};

/// Sum over taps of MSE(mu_out, mu_style) + MSE(sigma_out, sigma_style).
template <typename T>
StyleLossResult<T> style_loss(std::span<const BasicTensor<T>> output_taps, std::span<const BasicTensor<T>> style_taps,
                              double eps = kDefaultEps) {
  if (output_taps.size() != style_taps.size()) throw ShapeError("style_loss: tap lists differ in length");
  StyleLossResult<T> r;
  for (std::size_t k = 0; k < output_taps.size(); ++k) {
    const auto& out = output_taps[k];
    const auto& sty = style_taps[k];
    detail::require_nchw(out, "style_loss");
    detail::require_nchw(sty, "style_loss");
    if (out.dim(0) != sty.dim(0) || out.dim(1) != sty.dim(1))
      throw ShapeError("style_loss: tap " + std::to_string(k) + " batch/channel mismatch");
    const auto so = channel_stats(out, eps);
    const auto ss = channel_stats(sty, eps);
    auto lm = nn::mse(so.mu, ss.mu);
    auto ls = nn::mse(so.sigma, ss.sigma);
    r.value += lm.value + ls.value;
    r.grads.push_back(channel_stats_backward(out, so, lm.grad, ls.grad));
  }
  return r;
}

}  // namespace styleaug::adain
