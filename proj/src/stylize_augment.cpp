#include "styleaug/augment/stylize_augment.hpp"

#include <sstream>
#include <stdexcept>

namespace styleaug::augment {

void AugmentationPolicy::validate() const {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("replacement probability p must lie in [0, 1]");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("stylization strength alpha must lie in [0, 1]");
}

int pick_style_provider(int batch_size, int content_index, Rng& rng) {
  if (batch_size < 2) throw std::invalid_argument("style provider needs a batch of at least 2");
  if (content_index < 0 || content_index >= batch_size) throw std::out_of_range("content index outside the batch");
  std::uniform_int_distribution<int> pick(0, batch_size - 2);
  const int k = pick(rng);
  return k < content_index ? k : k + 1;
}

AugmentedBatch augment_batch(const data::Batch& batch, const adain::StyleTransferModel& model,
                             const AugmentationPolicy& policy, Rng& rng) {
  policy.validate();
  if (!model.trained) throw adain::UntrainedModelError("stylized augmentation needs a trained style model");
  const int n = batch.size();
  if (n < 2) throw std::invalid_argument("stylized augmentation needs a batch of at least 2");

  AugmentedBatch out;
  out.images = batch.images;
  out.labels = batch.labels;
  out.domain_ids = batch.domain_ids;
  out.image_ids = batch.image_ids;
  out.stylized_mask.assign(n, false);
  out.style_provider_index.assign(n, std::nullopt);

  // One uniform draw per sample regardless of p keeps the stream layout fixed.
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<const nn::Tensor*> contents, styles;
  std::vector<nn::Tensor> items(n);
  for (int i = 0; i < n; ++i) items[i] = nn::slice_item(batch.images, i);
  std::vector<int> targets;
  for (int i = 0; i < n; ++i) {
    const double u = unit(rng);
    if (!(policy.p >= 1.0 || u < policy.p)) continue;
    const int provider = pick_style_provider(n, i, rng);
    out.stylized_mask[i] = true;
    out.style_provider_index[i] = provider;
    contents.push_back(&items[i]);
    styles.push_back(&items[provider]);
    targets.push_back(i);
  }
  if (targets.empty()) return out;

  const nn::Tensor stylized =
      adain::stylize(model, nn::stack<float>(contents), nn::stack<float>(styles), policy.alpha);
  const std::size_t item = batch.images.item_size();
  for (std::size_t k = 0; k < targets.size(); ++k)
    std::copy(stylized.ptr() + k * item, stylized.ptr() + (k + 1) * item, out.images.ptr() + targets[k] * item);
  return out;
}

double AugmentationReport::rate() const { return samples ? static_cast<double>(stylized) / samples : 0.0; }

double AugmentationReport::cross_domain_fraction() const {
  return stylized ? static_cast<double>(cross_domain) / stylized : 0.0;
}

void AugmentationTally::add(const AugmentedBatch& batch) {
  ++report_.batches;
  report_.samples += batch.size();
  for (int i = 0; i < batch.size(); ++i) {
    if (!batch.stylized_mask[i]) continue;
    ++report_.stylized;
    if (batch.domain_ids[*batch.style_provider_index[i]] != batch.domain_ids[i]) ++report_.cross_domain;
  }
}

AugmentationReport augmentation_stats(std::span<const AugmentedBatch> history) {
  if (history.empty()) throw std::invalid_argument("augmentation_stats needs at least one batch");
  AugmentationTally tally;
  for (const auto& b : history) tally.add(b);
  return tally.report();
}

std::string format_report(const AugmentationReport& r) {
  std::ostringstream os;
  os << "[augmentation_stats]\n"
     << "batches = " << r.batches << "\n"
     << "samples = " << r.samples << "\n"
     << "stylized = " << r.stylized << "\n"
     << "rate = " << r.rate() << "\n"
     << "cross_domain = " << r.cross_domain << "\n"
     << "cross_domain_fraction = " << r.cross_domain_fraction() << "\n"
     << "[/augmentation_stats]";
  return os.str();
}

}  // namespace styleaug::augment
