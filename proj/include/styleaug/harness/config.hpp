#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "styleaug/adain/style_model.hpp"
#include "styleaug/data/protocol.hpp"
#include "styleaug/data/synthetic.hpp"

namespace styleaug::harness {

enum class Method { Baseline, Rotation, MixupPixel, MixupFeature };
enum class Augmentation { Original, Stylized };

std::string to_string(Method m);
std::string to_string(Augmentation a);
Method method_from_string(const std::string& name);
Augmentation augmentation_from_string(const std::string& name);

struct DatasetConfig {
  std::string path;  // image-folder root; empty selects the synthetic generator
  data::SyntheticSpec synthetic;  // its resolution is taken from `resolution`
  int resolution = 32;
  std::uint64_t seed = 7;
  data::TargetMode target_mode = data::TargetMode::Whole;
};

struct StylePhaseConfig {
  int epochs = 20;
  double learning_rate = 1e-3;
  int batch_size = 8;
  int encoder_pretrain_iterations = 300;
  double encoder_pretrain_lr = 0.001;
  std::vector<int> widths{8, 16, 32};
  int pooling_stages = 1;
  bool per_run = false;    // retrain the style model for every run instead of once per target
  std::string checkpoint;  // load instead of training; may contain {target}
};

struct ClassifierPhaseConfig {
  int iterations = 3000;
  double learning_rate = 0.001;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  int per_domain = 8;
  int val_every = 100;
  std::vector<int> widths{8, 16, 32, 32};
};

struct ProtocolConfig {
  double train_ratio = 0.9;
  int n_runs = 3;
  std::uint64_t base_seed = 0;
  std::vector<std::string> targets;  // empty means every domain in turn
};

struct ExperimentConfig {
  DatasetConfig dataset;
  Method method = Method::Baseline;
  Augmentation augmentation = Augmentation::Original;
  double alpha = 1.0;
  double p = 0.75;
  double lambda_style = 10.0;
  double eta = 0.5;
  double gamma = 0.4;
  StylePhaseConfig style;
  ClassifierPhaseConfig classifier;
  ProtocolConfig protocol;

  /// Throws std::invalid_argument naming the first offending field.
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const ExperimentConfig& config, const std::filesystem::path& path);

/// Style-phase settings with the seed that owns the model.
adain::StyleTrainingConfig style_training_config(const ExperimentConfig& config, std::uint64_t seed);

}  // namespace styleaug::harness
