#include "styleaug/data/batch.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace styleaug::data {

Batch make_batch(const std::vector<const LabeledImage*>& items) {
  if (items.empty()) throw std::invalid_argument("cannot build an empty batch");
  std::vector<const nn::Tensor*> pixels;
  Batch b;
  for (const LabeledImage* img : items) {
    pixels.push_back(&img->pixels);
    b.labels.push_back(img->label);
    b.domain_ids.push_back(img->domain);
    b.image_ids.push_back(img->id);
  }
  b.images = nn::stack<float>(pixels);
  return b;
}

Batch make_batch(const std::vector<LabeledImage>& items) {
  std::vector<const LabeledImage*> ptrs;
  for (const auto& i : items) ptrs.push_back(&i);
  return make_batch(ptrs);
}

BalancedBatchIterator::BalancedBatchIterator(std::vector<const std::vector<LabeledImage>*> sources, int per_domain,
                                             Rng rng, const Warn& warn)
    : sources_(std::move(sources)), per_domain_(per_domain), rng_(std::move(rng)) {
  if (per_domain_ < 1) throw std::invalid_argument("per_domain must be at least 1");
  if (sources_.empty()) throw std::invalid_argument("batch iterator needs at least one source");
  for (std::size_t s = 0; s < sources_.size(); ++s) {
    if (sources_[s]->empty()) throw std::invalid_argument("source " + std::to_string(s) + " is empty");
    const bool replace = sources_[s]->size() < static_cast<std::size_t>(per_domain_);
    with_replacement_.push_back(replace);
    if (replace && warn)
      warn("source " + std::to_string(s) + " has " + std::to_string(sources_[s]->size()) +
           " images, fewer than per_domain=" + std::to_string(per_domain_) + "; sampling with replacement");
    order_.emplace_back(sources_[s]->size());
    std::iota(order_.back().begin(), order_.back().end(), 0);
    std::shuffle(order_.back().begin(), order_.back().end(), rng_);
    cursor_.push_back(0);
  }
}

Batch BalancedBatchIterator::next() {
  std::vector<const LabeledImage*> items;
  items.reserve(batch_size());
  for (std::size_t s = 0; s < sources_.size(); ++s) {
    const auto& src = *sources_[s];
    if (with_replacement_[s]) {
      std::uniform_int_distribution<std::size_t> pick(0, src.size() - 1);
      for (int k = 0; k < per_domain_; ++k) items.push_back(&src[pick(rng_)]);
      continue;
    }
    for (int k = 0; k < per_domain_; ++k) {
      if (cursor_[s] == order_[s].size()) {
        std::shuffle(order_[s].begin(), order_[s].end(), rng_);
        cursor_[s] = 0;
      }
      items.push_back(&src[order_[s][cursor_[s]++]]);
    }
  }
  return make_batch(items);
}

void random_crop_flip(nn::Tensor& images, Rng& rng, int padding, bool flip) {
  if (images.rank() != 4) throw nn::ShapeError("random_crop_flip expects [B x C x H x W]");
  const int batch = images.dim(0), channels = images.dim(1), height = images.dim(2), width = images.dim(3);
  std::uniform_int_distribution<int> offset(0, 2 * padding);
  std::bernoulli_distribution coin(0.5);
  std::vector<float> out(images.item_size());
  for (int n = 0; n < batch; ++n) {
    const int oy = offset(rng) - padding, ox = offset(rng) - padding;
    const bool mirror = flip && coin(rng);
    float* img = images.ptr() + n * images.item_size();
    for (int c = 0; c < channels; ++c)
      for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
          const int sy = y + oy;
          const int sx = (mirror ? width - 1 - x : x) + ox;
          out[(static_cast<std::size_t>(c) * height + y) * width + x] =
              (sy < 0 || sx < 0 || sy >= height || sx >= width) ? 0.0f
                                                                 : img[(static_cast<std::size_t>(c) * height + sy) * width + sx];
        }
    std::copy(out.begin(), out.end(), img);
  }
}

}  // namespace styleaug::data
