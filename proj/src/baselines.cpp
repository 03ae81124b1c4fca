#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "styleaug/baselines/mixup.hpp"
#include "styleaug/baselines/rotation.hpp"

namespace styleaug::baselines {

namespace {

void rotate_plane(const float* in, float* out, int size, int k) {
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j) {
      int si = i, sj = j;
      switch (k) {
        case 1: si = j; sj = size - 1 - i; break;
        case 2: si = size - 1 - i; sj = size - 1 - j; break;
        case 3: si = size - 1 - j; sj = i; break;
        default: break;
      }
      out[i * size + j] = in[si * size + sj];
    }
}

void rotate_item(const float* in, float* out, int channels, int size, int k) {
  const std::size_t plane = static_cast<std::size_t>(size) * size;
  for (int c = 0; c < channels; ++c) rotate_plane(in + c * plane, out + c * plane, size, k);
}

void check_rotatable(const nn::Tensor& t, int k) {
  if (k < 0 || k >= kRotationClasses) throw std::out_of_range("rotation index must be in {0, 1, 2, 3}");
  if (t.rank() != 3 && t.rank() != 4) throw nn::ShapeError("rotate90 expects [C x H x W] or [B x C x H x W]");
  if (t.dim(t.rank() - 1) != t.dim(t.rank() - 2))
    throw nn::ShapeError("rotate90 needs a square image, got " + nn::shape_str(t.shape()));
}

void check_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("mixing weight must lie in [0, 1]");
}

nn::Tensor convex(const nn::Tensor& a, const nn::Tensor& b, double lambda, const char* what) {
  check_lambda(lambda);
  nn::require_same_shape(a, b, what);
  nn::Tensor out(a.shape());
  const float li = static_cast<float>(lambda), lj = static_cast<float>(1.0 - lambda);
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = li * a[k] + lj * b[k];
  return out;
}

}  // namespace

nn::Tensor rotate90(const nn::Tensor& image, int k) {
  check_rotatable(image, k);
  nn::Tensor out(image.shape());
  const int size = image.dim(image.rank() - 1);
  const int channels = image.dim(image.rank() - 3);
  const int items = image.rank() == 4 ? image.dim(0) : 1;
  const std::size_t stride = static_cast<std::size_t>(channels) * size * size;
  for (int n = 0; n < items; ++n) rotate_item(image.ptr() + n * stride, out.ptr() + n * stride, channels, size, k);
  return out;
}

RotationBatch make_rotation_batch(const nn::Tensor& images, Rng& rng) {
  check_rotatable(images, 0);
  if (images.rank() != 4) throw nn::ShapeError("make_rotation_batch expects [B x C x H x W]");
  RotationBatch out{nn::Tensor(images.shape()), {}};
  std::uniform_int_distribution<int> pick(0, kRotationClasses - 1);
  const int channels = images.dim(1), size = images.dim(3);
  const std::size_t stride = images.item_size();
  for (int n = 0; n < images.dim(0); ++n) {
    const int k = pick(rng);
    out.rotation_labels.push_back(k);
    rotate_item(images.ptr() + n * stride, out.images.ptr() + n * stride, channels, size, k);
  }
  return out;
}

double sample_mixup_lambda(double gamma, Rng& rng) {
  if (!(gamma >= 0.0)) throw std::invalid_argument("mixup gamma must be non-negative");
  if (gamma == 0.0) return 1.0;
  std::gamma_distribution<double> g(gamma, 1.0);
  const double a = g(rng), b = g(rng);
  // Both draws underflow to 0 for very small gamma; the limit splits mass evenly on {0, 1}.
  if (a + b == 0.0) return a >= b ? 1.0 : 0.0;
  return a / (a + b);
}

nn::Tensor mixup_pixel(const nn::Tensor& x_i, const nn::Tensor& x_j, double lambda) {
  return convex(x_i, x_j, lambda, "mixup_pixel");
}

nn::Tensor mixup_feature(const nn::Tensor& f_i, const nn::Tensor& f_j, double lambda) {
  return convex(f_i, f_j, lambda, "mixup_feature");
}

std::vector<int> mixup_permutation(int batch_size, Rng& rng) {
  std::vector<int> perm(batch_size);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

nn::Tensor mix_batch(const nn::Tensor& x, const std::vector<int>& perm, double lambda) {
  check_lambda(lambda);
  if (x.rank() < 1 || static_cast<int>(perm.size()) != x.dim(0)) throw nn::ShapeError("mix_batch: one partner per row");
  nn::Tensor out(x.shape());
  const std::size_t item = x.item_size();
  const float li = static_cast<float>(lambda), lj = static_cast<float>(1.0 - lambda);
  for (std::size_t b = 0; b < perm.size(); ++b) {
    const float* xi = x.ptr() + b * item;
    const float* xj = x.ptr() + perm[b] * item;
    float* o = out.ptr() + b * item;
    for (std::size_t k = 0; k < item; ++k) o[k] = li * xi[k] + lj * xj[k];
  }
  return out;
}

nn::Tensor mix_batch_backward(const nn::Tensor& grad_out, const std::vector<int>& perm, double lambda) {
  check_lambda(lambda);
  if (static_cast<int>(perm.size()) != grad_out.dim(0)) throw nn::ShapeError("mix_batch_backward: one partner per row");
  nn::Tensor grad(grad_out.shape());
  const std::size_t item = grad_out.item_size();
  const float li = static_cast<float>(lambda), lj = static_cast<float>(1.0 - lambda);
  for (std::size_t b = 0; b < perm.size(); ++b) {
    const float* g = grad_out.ptr() + b * item;
    float* gi = grad.ptr() + b * item;
    float* gj = grad.ptr() + perm[b] * item;
    for (std::size_t k = 0; k < item; ++k) {
      gi[k] += li * g[k];
      gj[k] += lj * g[k];
    }
  }
  return grad;
}

}  // namespace styleaug::baselines
