#pragma once

#include <string>
#include <vector>

#include "styleaug/nn/tensor.hpp"

namespace styleaug::nn {

enum class LayerKind { Conv, Linear, Relu, MaxPool, Upsample, Flatten };

enum class PadMode { Zero, Reflect };

std::string to_string(LayerKind kind);
LayerKind layer_kind_from_string(const std::string& name);
std::string to_string(PadMode mode);
PadMode pad_mode_from_string(const std::string& name);

/// One stage of a sequential network. Fields that do not apply to a kind stay zero.
struct LayerSpec {
  LayerKind kind = LayerKind::Relu;
  int in_channels = 0;   // conv: input channels; linear: input features
  int out_channels = 0;  // conv: output channels; linear: output features
  int kernel = 0;        // conv kernel size; pool window; upsample factor
  int stride = 1;
  int padding = 0;
  PadMode pad_mode = PadMode::Zero;

  static LayerSpec conv(int in, int out, int kernel, int stride = 1, int padding = 0,
                        PadMode mode = PadMode::Zero) {
    return {LayerKind::Conv, in, out, kernel, stride, padding, mode};
  }
  static LayerSpec linear(int in, int out) { return {LayerKind::Linear, in, out, 0, 1, 0, PadMode::Zero}; }
  static LayerSpec relu() { return {LayerKind::Relu}; }
  static LayerSpec maxpool(int window = 2) { return {LayerKind::MaxPool, 0, 0, window, window, 0, PadMode::Zero}; }
  static LayerSpec upsample(int factor = 2) { return {LayerKind::Upsample, 0, 0, factor, 1, 0, PadMode::Zero}; }
  static LayerSpec flatten() { return {LayerKind::Flatten}; }

  bool has_params() const noexcept { return kind == LayerKind::Conv || kind == LayerKind::Linear; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Output shape (batch dimension included) of `spec` applied to `in`.
Shape output_shape(const LayerSpec& spec, const Shape& in);

/// Shapes of the layer's parameters: {weight, bias} for conv/linear, empty otherwise.
std::vector<Shape> param_shapes(const LayerSpec& spec);

/// Fan-in used by the Kaiming-uniform initializer.
int fan_in(const LayerSpec& spec);

}  // namespace styleaug::nn
