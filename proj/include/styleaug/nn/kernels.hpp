#pragma once

// Per-layer forward/backward kernels, templated on the scalar type so the
// same code runs in float for training and in double for gradient oracles.

#include <Eigen/Core>

#include <limits>
#include <vector>

#include "styleaug/nn/layer.hpp"
#include "styleaug/nn/tensor.hpp"

namespace styleaug::nn::kernels {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

/// For every (input-channel, ky, kx) row and output pixel column, the flat
/// offset inside one input image, or -1 where the window falls on zero padding.
inline std::vector<int> im2col_table(const LayerSpec& s, int height, int width, int out_h, int out_w) {
  const int k = s.kernel;
  const int rows = s.in_channels * k * k;
  const int cols = out_h * out_w;
  std::vector<int> table(static_cast<std::size_t>(rows) * cols);
  auto resolve = [&](int i, int n) -> int {
    if (i >= 0 && i < n) return i;
    if (s.pad_mode == PadMode::Zero) return -1;
    if (i < 0) return -i;
    return 2 * n - 2 - i;
  };
  for (int c = 0; c < s.in_channels; ++c)
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        const int row = (c * k + ky) * k + kx;
        int* out = table.data() + static_cast<std::size_t>(row) * cols;
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = resolve(oy * s.stride - s.padding + ky, height);
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = resolve(ox * s.stride - s.padding + kx, width);
            out[oy * out_w + ox] = (iy < 0 || ix < 0) ? -1 : (c * height + iy) * width + ix;
          }
        }
      }
  return table;
}

/// y = conv(x). When `cols` is non-null it receives the im2col buffers of
/// every image ([B][K x P]) for reuse in the backward pass.
template <typename T>
void conv_forward(const LayerSpec& s, const BasicTensor<T>& x, const BasicTensor<T>& weight,
                  const BasicTensor<T>& bias, BasicTensor<T>& y, BasicTensor<T>* cols) {
  const Shape out_shape = output_shape(s, x.shape());
  const int batch = x.dim(0), height = x.dim(2), width = x.dim(3);
  const int out_h = out_shape[2], out_w = out_shape[3];
  const int rows = s.in_channels * s.kernel * s.kernel;
  const int pix = out_h * out_w;
  const std::vector<int> table = im2col_table(s, height, width, out_h, out_w);
  y = BasicTensor<T>(out_shape);
  BasicTensor<T> scratch;
  if (cols) *cols = BasicTensor<T>({batch, rows, pix});
  else scratch = BasicTensor<T>({rows, pix});

  ConstMatMap<T> w(weight.ptr(), s.out_channels, rows);
  Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> b(bias.ptr(), s.out_channels);
  const std::size_t in_item = x.item_size();
  const std::size_t col_item = static_cast<std::size_t>(rows) * pix;
  for (int n = 0; n < batch; ++n) {
    const T* src = x.ptr() + n * in_item;
    T* col = cols ? cols->ptr() + n * col_item : scratch.ptr();
    for (std::size_t i = 0; i < col_item; ++i) col[i] = table[i] < 0 ? T(0) : src[table[i]];
    MatMap<T> out(y.ptr() + n * y.item_size(), s.out_channels, pix);
    out.noalias() = w * ConstMatMap<T>(col, rows, pix);
    out.colwise() += b;
  }
}

/// Accumulates weight/bias gradients and (optionally) writes dx.
template <typename T>
void conv_backward(const LayerSpec& s, const Shape& in_shape, const BasicTensor<T>& cols,
                   const BasicTensor<T>& weight, const BasicTensor<T>& dy, BasicTensor<T>* dweight,
                   BasicTensor<T>* dbias, BasicTensor<T>* dx) {
  const int batch = in_shape[0], height = in_shape[2], width = in_shape[3];
  const int out_h = dy.dim(2), out_w = dy.dim(3);
  const int rows = s.in_channels * s.kernel * s.kernel;
  const int pix = out_h * out_w;
  const std::size_t col_item = static_cast<std::size_t>(rows) * pix;
  ConstMatMap<T> w(weight.ptr(), s.out_channels, rows);

  std::vector<int> table;
  RowMat<T> dcol;
  if (dx) {
    table = im2col_table(s, height, width, out_h, out_w);
    *dx = BasicTensor<T>(in_shape);
  }
  for (int n = 0; n < batch; ++n) {
    ConstMatMap<T> g(dy.ptr() + n * dy.item_size(), s.out_channels, pix);
    if (dweight) {
      MatMap<T> dw(dweight->ptr(), s.out_channels, rows);
      dw.noalias() += g * ConstMatMap<T>(cols.ptr() + n * col_item, rows, pix).transpose();
    }
    if (dbias) {
      Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> db(dbias->ptr(), s.out_channels);
      db += g.rowwise().sum();
    }
    if (dx) {
      dcol.noalias() = w.transpose() * g;
      T* dst = dx->ptr() + n * dx->item_size();
      const T* dc = dcol.data();
      for (std::size_t i = 0; i < col_item; ++i)
        if (table[i] >= 0) dst[table[i]] += dc[i];
    }
  }
}

template <typename T>
void linear_forward(const LayerSpec& s, const BasicTensor<T>& x, const BasicTensor<T>& weight,
                    const BasicTensor<T>& bias, BasicTensor<T>& y) {
  const Shape out_shape = output_shape(s, x.shape());
  y = BasicTensor<T>(out_shape);
  const int batch = x.dim(0);
  MatMap<T> out(y.ptr(), batch, s.out_channels);
  out.noalias() = ConstMatMap<T>(x.ptr(), batch, s.in_channels) *
                  ConstMatMap<T>(weight.ptr(), s.out_channels, s.in_channels).transpose();
  out.rowwise() += Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(bias.ptr(), s.out_channels);
}

template <typename T>
void linear_backward(const LayerSpec& s, const BasicTensor<T>& x, const BasicTensor<T>& weight,
                     const BasicTensor<T>& dy, BasicTensor<T>* dweight, BasicTensor<T>* dbias,
                     BasicTensor<T>* dx) {
  const int batch = x.dim(0);
  ConstMatMap<T> g(dy.ptr(), batch, s.out_channels);
  if (dweight)
    MatMap<T>(dweight->ptr(), s.out_channels, s.in_channels).noalias() +=
        g.transpose() * ConstMatMap<T>(x.ptr(), batch, s.in_channels);
  if (dbias)
    Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>(dbias->ptr(), s.out_channels) += g.colwise().sum();
  if (dx) {
    *dx = BasicTensor<T>(x.shape());
    MatMap<T>(dx->ptr(), batch, s.in_channels).noalias() =
        g * ConstMatMap<T>(weight.ptr(), s.out_channels, s.in_channels);
  }
}

template <typename T>
void relu_forward(const BasicTensor<T>& x, BasicTensor<T>& y) {
  y = BasicTensor<T>(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <typename T>
void relu_backward(const BasicTensor<T>& x, const BasicTensor<T>& dy, BasicTensor<T>& dx) {
  dx = BasicTensor<T>(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) dx[i] = x[i] > T(0) ? dy[i] : T(0);
}

/// Non-overlapping max pooling; `argmax` records the flat input offset per output.
template <typename T>
void maxpool_forward(const LayerSpec& s, const BasicTensor<T>& x, BasicTensor<T>& y,
                     std::vector<int>* argmax) {
  const Shape out_shape = output_shape(s, x.shape());
  y = BasicTensor<T>(out_shape);
  if (argmax) argmax->assign(y.size(), 0);
  const int planes = x.dim(0) * x.dim(1), height = x.dim(2), width = x.dim(3);
  const int oh = out_shape[2], ow = out_shape[3], k = s.kernel;
  std::size_t o = 0;
  for (int p = 0; p < planes; ++p) {
    const int base = p * height * width;
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox, ++o) {
        int best = base + (oy * k) * width + ox * k;
        for (int dy = 0; dy < k; ++dy)
          for (int dx = 0; dx < k; ++dx) {
            const int idx = base + (oy * k + dy) * width + ox * k + dx;
            if (x[idx] > x[best]) best = idx;
          }
        y[o] = x[best];
        if (argmax) (*argmax)[o] = best;
      }
  }
}

template <typename T>
void maxpool_backward(const Shape& in_shape, const std::vector<int>& argmax, const BasicTensor<T>& dy,
                      BasicTensor<T>& dx) {
  dx = BasicTensor<T>(in_shape);
  for (std::size_t o = 0; o < dy.size(); ++o) dx[argmax[o]] += dy[o];
}

template <typename T>
void upsample_forward(const LayerSpec& s, const BasicTensor<T>& x, BasicTensor<T>& y) {
  const Shape out_shape = output_shape(s, x.shape());
  y = BasicTensor<T>(out_shape);
  const int planes = x.dim(0) * x.dim(1), height = x.dim(2), width = x.dim(3), f = s.kernel;
  const int oh = out_shape[2], ow = out_shape[3];
  for (int p = 0; p < planes; ++p)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox)
        y[(static_cast<std::size_t>(p) * oh + oy) * ow + ox] = x[(static_cast<std::size_t>(p) * height + oy / f) * width + ox / f];
}

template <typename T>
void upsample_backward(const LayerSpec& s, const Shape& in_shape, const BasicTensor<T>& dy,
                       BasicTensor<T>& dx) {
  dx = BasicTensor<T>(in_shape);
  const int planes = in_shape[0] * in_shape[1], height = in_shape[2], width = in_shape[3], f = s.kernel;
  const int oh = dy.dim(2), ow = dy.dim(3);
  for (int p = 0; p < planes; ++p)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox)
        dx[(static_cast<std::size_t>(p) * height + oy / f) * width + ox / f] += dy[(static_cast<std::size_t>(p) * oh + oy) * ow + ox];
}

}  // namespace styleaug::nn::kernels
