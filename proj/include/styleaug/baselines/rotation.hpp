#pragma once

#include <vector>

#include "styleaug/nn/tensor.hpp"
#include "styleaug/random.hpp"

namespace styleaug::baselines {

inline constexpr int kRotationClasses = 4;
inline constexpr double kDefaultEta = 0.5;

/// Counter-clockwise rotation by 90*k degrees of a [C x H x W] image or every
/// item of a [B x C x H x W] batch. Requires H == W and k in {0,1,2,3}.
nn::Tensor rotate90(const nn::Tensor& image, int k);

struct RotationBatch {
  nn::Tensor images;                 // each item rotated by its own label
  std::vector<int> rotation_labels;  // k in {0,1,2,3}
};

/// One uniformly drawn rotation per image.
RotationBatch make_rotation_batch(const nn::Tensor& images, Rng& rng);

/// cls_loss + eta * rot_loss.
inline double multitask_loss(double cls_loss, double rot_loss, double eta) { return cls_loss + eta * rot_loss; }

}  // namespace styleaug::baselines
