#include "styleaug/harness/classifier.hpp"

#include <cmath>
#include <sstream>

#include "styleaug/baselines/mixup.hpp"
#include "styleaug/baselines/rotation.hpp"
#include "styleaug/data/batch.hpp"
#include "styleaug/harness/experiment.hpp"
#include "styleaug/nn/loss.hpp"
#include "styleaug/nn/optim.hpp"

namespace styleaug::harness {

using nn::LayerSpec;
using nn::Tensor;

Classifier make_classifier(int channels, int resolution, const std::vector<int>& widths, int num_classes, Rng& rng) {
  if (widths.empty()) throw std::invalid_argument("classifier needs at least one conv block");
  if (resolution % (1 << widths.size()) != 0)
    throw std::invalid_argument("resolution " + std::to_string(resolution) + " is not divisible by 2^" +
                                std::to_string(widths.size()));
  Classifier m;
  m.trunk = nn::Network({channels, resolution, resolution});
  int prev = channels;
  for (int w : widths) {
    m.trunk.add(LayerSpec::conv(prev, w, 3, 1, 1)).add(LayerSpec::relu()).add(LayerSpec::maxpool(2));
    prev = w;
  }
  const nn::Shape feat = m.trunk.sample_output_shape();
  const nn::Shape per_sample{feat[1], feat[2], feat[3]};
  const int flat = feat[1] * feat[2] * feat[3];
  m.head = nn::Network(per_sample);
  m.head.add(LayerSpec::flatten()).add(LayerSpec::linear(flat, num_classes));
  m.rot_head = nn::Network(per_sample);
  m.rot_head.add(LayerSpec::flatten()).add(LayerSpec::linear(flat, baselines::kRotationClasses));
  nn::kaiming_init(m.trunk, rng);
  nn::kaiming_init(m.head, rng);
  nn::kaiming_init(m.rot_head, rng);
  return m;
}

std::uint64_t parameter_hash(const Classifier& m) {
  std::uint64_t h = nn::parameter_hash(m.trunk.params);
  h = h * 1099511628211ULL ^ nn::parameter_hash(m.head.params);
  return h * 1099511628211ULL ^ nn::parameter_hash(m.rot_head.params);
}

nn::Checkpoint to_checkpoint(const Classifier& model, const std::vector<std::string>& class_names) {
  nn::Checkpoint ckpt;
  ckpt.networks = {{"trunk", model.trunk}, {"head", model.head}, {"rot_head", model.rot_head}};
  std::string classes;
  for (std::size_t i = 0; i < class_names.size(); ++i) classes += (i ? "," : "") + class_names[i];
  ckpt.metadata = {{"kind", "classifier"}, {"classes", classes.empty() ? "-" : classes}};
  return ckpt;
}

Classifier classifier_from_checkpoint(const nn::Checkpoint& ckpt) {
  auto it = ckpt.metadata.find("kind");
  if (it == ckpt.metadata.end() || it->second != "classifier")
    throw nn::CheckpointError("checkpoint does not hold a classifier");
  return {ckpt.network("trunk"), ckpt.network("head"), ckpt.network("rot_head")};
}

std::vector<int> predict(const Classifier& m, const Tensor& images) {
  return nn::argmax_rows(nn::forward(m.head, nn::forward(m.trunk, images, false).output, false).output);
}

double accuracy(const Classifier& m, const std::vector<data::LabeledImage>& images) {
  if (images.empty()) throw std::invalid_argument("accuracy of an empty image set");
  constexpr std::size_t kChunk = 256;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < images.size(); start += kChunk) {
    std::vector<const data::LabeledImage*> items;
    for (std::size_t k = start; k < std::min(images.size(), start + kChunk); ++k) items.push_back(&images[k]);
    const data::Batch b = data::make_batch(items);
    const auto pred = predict(m, b.images);
    for (std::size_t k = 0; k < pred.size(); ++k) correct += pred[k] == b.labels[k];
  }
  return static_cast<double>(correct) / images.size();
}

namespace {

struct StepGrads {
  double loss = 0.0;
  nn::ParamSet trunk, head, rot_head;
};

void add_into(nn::ParamSet& acc, const nn::ParamSet& g, float scale) {
  for (std::size_t l = 0; l < acc.size(); ++l)
    for (std::size_t p = 0; p < acc[l].size(); ++p)
      for (std::size_t k = 0; k < acc[l][p].size(); ++k) acc[l][p][k] += scale * g[l][p][k];
}

StepGrads plain_step(const Classifier& m, const Tensor& images, const std::vector<int>& labels) {
  auto ft = nn::forward(m.trunk, images);
  auto fh = nn::forward(m.head, ft.output);
  auto loss = nn::cross_entropy<float>(fh.output, labels);
  auto bh = nn::backward(m.head, fh.trace, loss.grad, {}, {true, true});
  auto bt = nn::backward(m.trunk, ft.trace, bh.input_grad);
  return {loss.value, std::move(bt.param_grads), std::move(bh.param_grads), {}};
}

StepGrads rotation_step(const Classifier& m, const Tensor& images, const std::vector<int>& labels, double eta,
                        Rng& rng) {
  StepGrads g = plain_step(m, images, labels);
  const auto rot = baselines::make_rotation_batch(images, rng);
  auto ft = nn::forward(m.trunk, rot.images);
  auto fr = nn::forward(m.rot_head, ft.output);
  auto loss = nn::cross_entropy<float>(fr.output, rot.rotation_labels);
  auto br = nn::backward(m.rot_head, fr.trace, loss.grad, {}, {true, true});
  auto bt = nn::backward(m.trunk, ft.trace, br.input_grad);
  add_into(g.trunk, bt.param_grads, static_cast<float>(eta));
  g.rot_head = std::move(br.param_grads);
  for (auto& layer : g.rot_head)
    for (auto& t : layer)
      for (float& v : t.storage()) v *= static_cast<float>(eta);
  g.loss = baselines::multitask_loss(g.loss, loss.value, eta);
  return g;
}

StepGrads mixup_step(const Classifier& m, const Tensor& images, const std::vector<int>& labels, double gamma,
                     baselines::MixupLevel level, Rng& rng) {
  const double lambda = baselines::sample_mixup_lambda(gamma, rng);
  const std::vector<int> perm = baselines::mixup_permutation(static_cast<int>(labels.size()), rng);
  std::vector<int> partner(labels.size());
  for (std::size_t b = 0; b < labels.size(); ++b) partner[b] = labels[perm[b]];

  const bool pixel = level == baselines::MixupLevel::Pixel;
  auto ft = nn::forward(m.trunk, pixel ? baselines::mix_batch(images, perm, lambda) : images);
  const Tensor features = pixel ? ft.output : baselines::mix_batch(ft.output, perm, lambda);
  auto fh = nn::forward(m.head, features);
  auto loss = baselines::mixed_loss(fh.output, labels, partner, lambda);
  auto bh = nn::backward(m.head, fh.trace, loss.grad, {}, {true, true});
  const Tensor upstream = pixel ? bh.input_grad : baselines::mix_batch_backward(bh.input_grad, perm, lambda);
  auto bt = nn::backward(m.trunk, ft.trace, upstream);
  return {loss.value, std::move(bt.param_grads), std::move(bh.param_grads), {}};
}

}  // namespace

ClassifierRun train_classifier(const ExperimentConfig& config, const data::ProtocolSplit& split, int num_classes,
                               const adain::StyleTransferModel* style_model, std::uint64_t run_seed,
                               const Logger& log) {
  config.validate();
  const bool stylized = config.augmentation == Augmentation::Stylized;
  if (stylized && (style_model == nullptr || !style_model->trained))
    throw std::invalid_argument("stylized augmentation requires a trained style model");
  if (split.sources.empty()) throw std::invalid_argument("protocol split has no source domains");

  const auto& cc = config.classifier;
  const nn::Shape image_shape = split.sources.front().train.front().pixels.shape();
  Rng init_rng = make_stream(run_seed, Stream::Init);
  ClassifierRun run;
  run.model = make_classifier(image_shape[0], image_shape[1], cc.widths, num_classes, init_rng);
  Classifier& model = run.model;

  std::vector<const std::vector<data::LabeledImage>*> sources;
  std::vector<data::LabeledImage> val;
  for (const auto& s : split.sources) {
    sources.push_back(&s.train);
    val.insert(val.end(), s.val.begin(), s.val.end());
  }
  data::BalancedBatchIterator batches(sources, cc.per_domain, make_stream(run_seed, Stream::Batches), log);
  Rng standard_rng = make_stream(run_seed, Stream::StandardAug);
  Rng style_rng = make_stream(run_seed, Stream::StyleAug);
  Rng method_rng = make_stream(run_seed, Stream::Method);
  augment::AugmentationPolicy policy{config.p, config.alpha, run_seed};
  augment::AugmentationTally tally;

  const auto make_opt = [&] {
    return nn::OptimizerState{static_cast<float>(cc.learning_rate), static_cast<float>(cc.momentum),
                              static_cast<float>(cc.weight_decay), {}};
  };
  nn::OptimizerState trunk_opt = make_opt(), head_opt = make_opt(), rot_opt = make_opt();
  std::vector<Classifier> checkpoints;
  double loss_sum = 0.0;
  int loss_count = 0;

  for (int it = 1; it <= cc.iterations; ++it) {
    data::Batch batch = batches.next();
    data::random_crop_flip(batch.images, standard_rng);
    Tensor images;
    if (stylized) {
      augment::AugmentedBatch aug = augment::augment_batch(batch, *style_model, policy, style_rng);
      tally.add(aug);
      images = std::move(aug.images);
    } else {
      images = std::move(batch.images);
    }

    StepGrads g;
    switch (config.method) {
      case Method::Baseline: g = plain_step(model, images, batch.labels); break;
      case Method::Rotation: g = rotation_step(model, images, batch.labels, config.eta, method_rng); break;
      case Method::MixupPixel:
        g = mixup_step(model, images, batch.labels, config.gamma, baselines::MixupLevel::Pixel, method_rng);
        break;
      case Method::MixupFeature:
        g = mixup_step(model, images, batch.labels, config.gamma, baselines::MixupLevel::Feature, method_rng);
        break;
    }
    if (!std::isfinite(g.loss)) throw adain::TrainingDiverged("classifier loss diverged at iteration " + std::to_string(it));
    nn::sgd_step(model.trunk.params, g.trunk, trunk_opt);
    nn::sgd_step(model.head.params, g.head, head_opt);
    if (config.method == Method::Rotation) nn::sgd_step(model.rot_head.params, g.rot_head, rot_opt);
    loss_sum += g.loss;
    ++loss_count;

    if (it % cc.val_every == 0 || it == cc.iterations) {
      const double acc = accuracy(model, val);
      run.val_iterations.push_back(it);
      run.val_curve.push_back(acc);
      checkpoints.push_back(model);
      run.final_train_loss = loss_sum / loss_count;
      if (log) {
        std::ostringstream os;
        os << "iteration " << it << " train_loss " << run.final_train_loss << " val_acc " << acc;
        log(os.str());
      }
      loss_sum = 0.0;
      loss_count = 0;
    }
  }
  run.selected = select_model(run.val_curve);
  run.model = checkpoints[run.selected];
  run.augmentation = tally.report();
  if (log && stylized) log(augment::format_report(run.augmentation));
  return run;
}

}  // namespace styleaug::harness
