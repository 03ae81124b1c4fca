#include "styleaug/nn/layer.hpp"

#include <array>
#include <utility>

namespace styleaug::nn {

namespace {

constexpr std::array<std::pair<LayerKind, const char*>, 6> kKindNames{{
    {LayerKind::Conv, "conv"},
    {LayerKind::Linear, "linear"},
    {LayerKind::Relu, "relu"},
    {LayerKind::MaxPool, "maxpool"},
    {LayerKind::Upsample, "nearest-upsample"},
    {LayerKind::Flatten, "flatten"},
}};

void require_rank(const Shape& in, std::size_t rank, const char* kind) {
  if (in.size() != rank)
    throw ShapeError(std::string(kind) + " expects a rank-" + std::to_string(rank) + " input, got " +
                     shape_str(in));
}

}  // namespace

std::string to_string(LayerKind kind) {
  for (auto [k, name] : kKindNames)
    if (k == kind) return name;
  return "unknown";
}

LayerKind layer_kind_from_string(const std::string& name) {
  for (auto [k, n] : kKindNames)
    if (name == n) return k;
  throw std::invalid_argument("unknown layer kind '" + name + "'");
}

std::string to_string(PadMode mode) { return mode == PadMode::Reflect ? "reflect" : "zero"; }

PadMode pad_mode_from_string(const std::string& name) {
  if (name == "reflect") return PadMode::Reflect;
  if (name == "zero") return PadMode::Zero;
  throw std::invalid_argument("unknown padding mode '" + name + "'");
}

Shape output_shape(const LayerSpec& spec, const Shape& in) {
  switch (spec.kind) {
    case LayerKind::Conv: {
      require_rank(in, 4, "conv");
      if (in[1] != spec.in_channels)
        throw ShapeError("conv expects " + std::to_string(spec.in_channels) + " channels, got " +
                         shape_str(in));
      if (spec.pad_mode == PadMode::Reflect && (spec.padding >= in[2] || spec.padding >= in[3]))
        throw ShapeError("reflection padding must be smaller than the spatial size");
      const int h = (in[2] + 2 * spec.padding - spec.kernel) / spec.stride + 1;
      const int w = (in[3] + 2 * spec.padding - spec.kernel) / spec.stride + 1;
      if (h <= 0 || w <= 0) throw ShapeError("conv kernel larger than padded input " + shape_str(in));
      return {in[0], spec.out_channels, h, w};
    }
    case LayerKind::Linear:
      require_rank(in, 2, "linear");
      if (in[1] != spec.in_channels)
        throw ShapeError("linear expects " + std::to_string(spec.in_channels) + " features, got " +
                         shape_str(in));
      return {in[0], spec.out_channels};
    case LayerKind::Relu:
      return in;
    case LayerKind::MaxPool: {
      require_rank(in, 4, "maxpool");
      const int h = in[2] / spec.kernel;
      const int w = in[3] / spec.kernel;
      if (h <= 0 || w <= 0) throw ShapeError("maxpool window larger than input " + shape_str(in));
      return {in[0], in[1], h, w};
    }
    case LayerKind::Upsample:
      require_rank(in, 4, "nearest-upsample");
      return {in[0], in[1], in[2] * spec.kernel, in[3] * spec.kernel};
    case LayerKind::Flatten: {
      if (in.size() < 2) throw ShapeError("flatten expects a batched input");
      int features = 1;
      for (std::size_t i = 1; i < in.size(); ++i) features *= in[i];
      return {in[0], features};
    }
  }
  throw ShapeError("unhandled layer kind");
}

std::vector<Shape> param_shapes(const LayerSpec& spec) {
  switch (spec.kind) {
    case LayerKind::Conv:
      return {{spec.out_channels, spec.in_channels, spec.kernel, spec.kernel}, {spec.out_channels}};
    case LayerKind::Linear:
      return {{spec.out_channels, spec.in_channels}, {spec.out_channels}};
    default:
      return {};
  }
}

int fan_in(const LayerSpec& spec) {
  if (spec.kind == LayerKind::Conv) return spec.in_channels * spec.kernel * spec.kernel;
  if (spec.kind == LayerKind::Linear) return spec.in_channels;
  return 0;
}

}  // namespace styleaug::nn
