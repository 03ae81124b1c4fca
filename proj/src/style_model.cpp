#include "styleaug/adain/style_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "styleaug/data/batch.hpp"
#include "styleaug/nn/loss.hpp"
#include "styleaug/nn/optim.hpp"
#include "styleaug/random.hpp"

namespace styleaug::adain {

using nn::LayerSpec;
using nn::PadMode;
using nn::Tensor;

StyleTransferModel make_style_model(const StyleArchitecture& arch, std::uint64_t seed) {
  if (arch.widths.empty()) throw std::invalid_argument("style architecture needs at least one block");
  StyleTransferModel m;
  m.encoder = nn::Network({arch.channels, arch.resolution, arch.resolution});
  int prev = arch.channels;
  for (std::size_t i = 0; i < arch.widths.size(); ++i) {
    if (i > 0 && static_cast<int>(i) <= arch.pooling_stages) m.encoder.add(LayerSpec::maxpool(2));
    m.encoder.add(LayerSpec::conv(prev, arch.widths[i], 3, 1, 1, PadMode::Reflect)).add(LayerSpec::relu()).tap();
    prev = arch.widths[i];
  }
  const nn::Shape feat = m.encoder.sample_output_shape();
  m.decoder = nn::Network({feat[1], feat[2], feat[3]});
  for (std::size_t i = arch.widths.size() - 1; i > 0; --i) {
    m.decoder.add(LayerSpec::conv(arch.widths[i], arch.widths[i - 1], 3, 1, 1, PadMode::Reflect)).add(LayerSpec::relu());
    if (static_cast<int>(i) <= arch.pooling_stages)
      m.decoder.add(LayerSpec::upsample(2))
          .add(LayerSpec::conv(arch.widths[i - 1], arch.widths[i - 1], 3, 1, 1, PadMode::Reflect))
          .add(LayerSpec::relu());
  }
  m.decoder.add(LayerSpec::conv(arch.widths[0], arch.channels, 3, 1, 1, PadMode::Reflect));
  Rng rng(derive_seed(seed, {0xADA1}));
  nn::kaiming_init(m.encoder, rng);
  nn::kaiming_init(m.decoder, rng);
  return m;
}

Tensor decoder_input(const StyleTransferModel& model, const Tensor& content, const Tensor& style, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  if (content.rank() != 4 || style.rank() != 4 || content.dim(0) != style.dim(0))
    throw nn::ShapeError("stylize expects equally sized [B x C x H x W] content and style batches");
  const Tensor fc = nn::forward(model.encoder, content, false).output;
  if (alpha == 0.0) return fc;
  const Tensor fs = nn::forward(model.encoder, style, false).output;
  return interpolate_features(fc, adain(fc, fs, model.eps), alpha);
}

Tensor stylize(const StyleTransferModel& model, const Tensor& content, const Tensor& style, double alpha) {
  if (!model.trained) throw UntrainedModelError("style model has not been trained");
  Tensor out = nn::forward(model.decoder, decoder_input(model, content, style, alpha), false).output;
  if (out.shape() != content.shape())
    throw nn::ShapeError("decoder output " + nn::shape_str(out.shape()) + " does not match content " +
                         nn::shape_str(content.shape()));
  for (float& v : out.storage()) v = std::clamp(v, 0.0f, 1.0f);
  return out;
}

StyleStep style_loss_and_grads(const StyleTransferModel& model, const Tensor& content, const Tensor& style) {
  const Tensor fc = nn::forward(model.encoder, content, false).output;
  const auto fs = nn::forward(model.encoder, style, false);
  const Tensor target = adain(fc, fs.output, model.eps);

  const auto decoded = nn::forward(model.decoder, target);
  const auto reencoded = nn::forward(model.encoder, decoded.output);

  const auto lc = content_loss(reencoded.output, target);
  auto ls = style_loss<float>(reencoded.taps, fs.taps, model.eps);
  for (auto& g : ls.grads)
    for (float& v : g.storage()) v *= static_cast<float>(model.lambda_style);

  const auto enc_back = nn::backward<float>(model.encoder, reencoded.trace, lc.grad, ls.grads, {false, true});
  auto dec_back = nn::backward<float>(model.decoder, decoded.trace, enc_back.input_grad);

  StyleStep step;
  step.loss.content = lc.value;
  step.loss.style = ls.value;
  step.loss.total = lc.value + model.lambda_style * ls.value;
  step.decoder_grads = std::move(dec_back.param_grads);
  return step;
}

namespace {

/// Trains the encoder jointly with a throwaway linear head on class labels.
double pretrain_encoder(nn::Network& encoder, const std::vector<data::LabeledImage>& images, int num_classes,
                        const StyleTrainingConfig& cfg, Rng& rng) {
  const nn::Shape feat = encoder.sample_output_shape();
  nn::Network head({feat[1], feat[2], feat[3]});
  head.add(LayerSpec::maxpool(2)).add(LayerSpec::flatten());
  head.add(LayerSpec::linear(head.sample_output_shape()[1], num_classes));
  nn::kaiming_init(head, rng);
  nn::OptimizerState enc_opt{static_cast<float>(cfg.encoder_pretrain_lr), 0.9f, 1e-4f, {}};
  nn::OptimizerState head_opt = enc_opt;

  std::uniform_int_distribution<std::size_t> pick(0, images.size() - 1);
  const int batch = std::max(cfg.batch_size, 16);
  int correct = 0, seen = 0;
  for (int it = 0; it < cfg.encoder_pretrain_iterations; ++it) {
    std::vector<const data::LabeledImage*> items;
    for (int k = 0; k < batch; ++k) items.push_back(&images[pick(rng)]);
    data::Batch b = data::make_batch(items);
    data::random_crop_flip(b.images, rng);
    auto fe = nn::forward(encoder, b.images);
    auto fh = nn::forward(head, fe.output);
    auto loss = nn::cross_entropy<float>(fh.output, b.labels);
    if (!std::isfinite(loss.value)) throw TrainingDiverged("encoder pretraining diverged at iteration " + std::to_string(it));
    if (it >= cfg.encoder_pretrain_iterations * 3 / 4) {
      const auto pred = nn::argmax_rows(fh.output);
      for (int k = 0; k < batch; ++k) correct += pred[k] == b.labels[k];
      seen += batch;
    }
    auto bh = nn::backward(head, fh.trace, loss.grad, {}, {true, true});
    auto be = nn::backward(encoder, fe.trace, bh.input_grad);
    nn::sgd_step(head.params, bh.param_grads, head_opt);
    nn::sgd_step(encoder.params, be.param_grads, enc_opt);
  }
  return seen ? static_cast<double>(correct) / seen : 0.0;
}

}  // namespace

StyleTrainingResult train_style_model(const std::vector<data::LabeledImage>& images, int num_classes,
                                      const StyleTrainingConfig& config, const ProgressFn& progress) {
  if (images.size() < 2) throw std::invalid_argument("style training needs at least 2 source images");
  if (config.epochs < 1 || config.batch_size < 1) throw std::invalid_argument("style training needs positive epochs and batch size");
  StyleTrainingResult result;
  StyleTransferModel& model = result.model;
  model = make_style_model(config.architecture, config.seed);
  model.lambda_style = config.lambda_style;
  model.eps = config.eps;

  Rng rng = make_stream(config.seed, Stream::StyleTraining);
  if (config.encoder_pretrain_iterations > 0) {
    result.encoder_pretrain_accuracy = pretrain_encoder(model.encoder, images, num_classes, config, rng);
    if (progress) {
      std::ostringstream os;
      os << "encoder pretraining accuracy " << result.encoder_pretrain_accuracy;
      progress(os.str());
    }
  }

  nn::AdamState opt;
  opt.learning_rate = static_cast<float>(config.learning_rate);
  std::vector<std::size_t> content_order(images.size()), style_order(images.size());
  std::iota(content_order.begin(), content_order.end(), 0);
  std::iota(style_order.begin(), style_order.end(), 0);
  const std::size_t batch = std::min<std::size_t>(config.batch_size, images.size());
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(content_order.begin(), content_order.end(), rng);
    std::shuffle(style_order.begin(), style_order.end(), rng);
    EpochLoss sum;
    int steps = 0;
    for (std::size_t start = 0; start + batch <= images.size(); start += batch) {
      std::vector<const data::LabeledImage*> content, style;
      for (std::size_t k = start; k < start + batch; ++k) {
        content.push_back(&images[content_order[k]]);
        style.push_back(&images[style_order[k]]);
      }
      const StyleStep step = style_loss_and_grads(model, data::make_batch(content).images, data::make_batch(style).images);
      if (!std::isfinite(step.loss.total)) {
        std::ostringstream os;
        os << "style training diverged at epoch " << epoch << " step " << steps << " (L_c=" << step.loss.content
           << ", L_s=" << step.loss.style << ")";
        throw TrainingDiverged(os.str());
      }
      nn::adam_step(model.decoder.params, step.decoder_grads, opt);
      sum.total += step.loss.total;
      sum.content += step.loss.content;
      sum.style += step.loss.style;
      ++steps;
    }
    result.curve.push_back({sum.total / steps, sum.content / steps, sum.style / steps});
    if (progress) {
      std::ostringstream os;
      os << "style epoch " << epoch + 1 << "/" << config.epochs << " L_A=" << result.curve.back().total
         << " L_c=" << result.curve.back().content << " L_s=" << result.curve.back().style;
      progress(os.str());
    }
  }
  model.trained = true;
  return result;
}

nn::Checkpoint to_checkpoint(const StyleTransferModel& model) {
  nn::Checkpoint ckpt;
  ckpt.networks = {{"encoder", model.encoder}, {"decoder", model.decoder}};
  std::ostringstream lambda, eps;
  lambda.precision(17);
  eps.precision(17);
  lambda << model.lambda_style;
  eps << model.eps;
  std::string taps;
  for (std::size_t i = 0; i < model.encoder.tap_points.size(); ++i)
    taps += (i ? "," : "") + std::to_string(model.encoder.tap_points[i]);
  ckpt.metadata = {{"kind", "style-model"},
                   {"lambda", lambda.str()},
                   {"eps", eps.str()},
                   {"style_taps", taps.empty() ? "-" : taps},
                   {"trained", model.trained ? "1" : "0"}};
  return ckpt;
}

StyleTransferModel style_model_from_checkpoint(const nn::Checkpoint& ckpt) {
  auto it = ckpt.metadata.find("kind");
  if (it == ckpt.metadata.end() || it->second != "style-model")
    throw nn::CheckpointError("checkpoint does not hold a style model");
  StyleTransferModel m;
  m.encoder = ckpt.network("encoder");
  m.decoder = ckpt.network("decoder");
  m.lambda_style = std::stod(ckpt.metadata.at("lambda"));
  m.eps = std::stod(ckpt.metadata.at("eps"));
  m.trained = ckpt.metadata.at("trained") == "1";
  return m;
}

}  // namespace styleaug::adain
