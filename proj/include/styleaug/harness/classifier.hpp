#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "styleaug/adain/style_model.hpp"
#include "styleaug/augment/stylize_augment.hpp"
#include "styleaug/data/protocol.hpp"
#include "styleaug/harness/config.hpp"
#include "styleaug/nn/checkpoint.hpp"
#include "styleaug/nn/network.hpp"

namespace styleaug::harness {

using Logger = std::function<void(const std::string&)>;

/// Conv trunk (conv3x3 zero-padded, relu, 2x2 max-pool per block) shared by a
/// class head and a rotation head, both flatten + linear.
struct Classifier {
  nn::Network trunk;
  nn::Network head;
  nn::Network rot_head;
};

Classifier make_classifier(int channels, int resolution, const std::vector<int>& widths, int num_classes, Rng& rng);
std::uint64_t parameter_hash(const Classifier& model);

nn::Checkpoint to_checkpoint(const Classifier& model, const std::vector<std::string>& class_names);
/// Throws nn::CheckpointError unless the checkpoint holds a classifier.
Classifier classifier_from_checkpoint(const nn::Checkpoint& ckpt);

/// Predicted class per image of a [B x C x H x W] batch.
std::vector<int> predict(const Classifier& model, const nn::Tensor& images);
/// Fraction of correctly classified images, evaluated without augmentation.
double accuracy(const Classifier& model, const std::vector<data::LabeledImage>& images);

struct ClassifierRun {
  Classifier model;                // parameters of the selected checkpoint
  std::vector<int> val_iterations;
  std::vector<double> val_curve;   // source-validation accuracy at each checkpoint
  std::size_t selected = 0;
  double final_train_loss = 0.0;
  augment::AugmentationReport augmentation;
};

/// Trains on the source train splits only. `style_model` is required when the
/// config asks for stylized augmentation and ignored otherwise.
ClassifierRun train_classifier(const ExperimentConfig& config, const data::ProtocolSplit& split, int num_classes,
                               const adain::StyleTransferModel* style_model, std::uint64_t run_seed,
                               const Logger& log = {});

}  // namespace styleaug::harness
