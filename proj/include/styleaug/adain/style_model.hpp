#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "styleaug/adain/adain.hpp"
#include "styleaug/data/dataset.hpp"
#include "styleaug/nn/checkpoint.hpp"
#include "styleaug/nn/network.hpp"

namespace styleaug::adain {

/// Encoder E (with a tap on every relu) and decoder D. Only D is trained
/// against the AdaIN objective; E is pretrained and then frozen.
struct StyleTransferModel {
  nn::Network encoder;
  nn::Network decoder;
  double lambda_style = 10.0;
  double eps = kDefaultEps;
  bool trained = false;
};

struct StyleArchitecture {
  int channels = 3;
  int resolution = 32;
  std::vector<int> widths{8, 16, 32};  // one conv block per entry
  int pooling_stages = 1;              // 2x max-pooling precedes blocks 1..pooling_stages
};

/// Fresh Kaiming-initialized encoder/decoder pair (reflection padding throughout).
StyleTransferModel make_style_model(const StyleArchitecture& arch, std::uint64_t seed);

struct UntrainedModelError : std::logic_error {
  using std::logic_error::logic_error;
};

/// (1 - alpha) * E(content) + alpha * adain(E(content), E(style)): the decoder input.
nn::Tensor decoder_input(const StyleTransferModel& model, const nn::Tensor& content, const nn::Tensor& style,
                         double alpha);

/// D(decoder_input(...)) clamped to [0,1]. Inputs are [B x C x H x W] with matching shapes.
nn::Tensor stylize(const StyleTransferModel& model, const nn::Tensor& content, const nn::Tensor& style, double alpha);

struct StyleTrainingConfig {
  int epochs = 20;
  double learning_rate = 1e-3;  // Adam on the decoder
  int batch_size = 8;
  double lambda_style = 10.0;
  double eps = kDefaultEps;
  int encoder_pretrain_iterations = 300;
  double encoder_pretrain_lr = 0.001;
  std::uint64_t seed = 0;
  StyleArchitecture architecture;
};

struct EpochLoss {
  double total = 0.0;    // L_A = L_c + lambda * L_s
  double content = 0.0;  // L_c
  double style = 0.0;    // L_s
};

struct StyleTrainingResult {
  StyleTransferModel model;
  std::vector<EpochLoss> curve;  // mean over the steps of each epoch
  double encoder_pretrain_accuracy = 0.0;
};

struct TrainingDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Pretrains and freezes the encoder as a source classifier, then trains the
/// decoder on random content/style pairs drawn from `images`.
StyleTrainingResult train_style_model(const std::vector<data::LabeledImage>& images, int num_classes,
                                      const StyleTrainingConfig& config, const ProgressFn& progress = {});

/// One optimization objective evaluation for a content/style batch: returns
/// the losses and the decoder parameter gradients.
struct StyleStep {
  EpochLoss loss;
  nn::ParamSet decoder_grads;
};
StyleStep style_loss_and_grads(const StyleTransferModel& model, const nn::Tensor& content, const nn::Tensor& style);

nn::Checkpoint to_checkpoint(const StyleTransferModel& model);
StyleTransferModel style_model_from_checkpoint(const nn::Checkpoint& ckpt);

}  // namespace styleaug::adain
