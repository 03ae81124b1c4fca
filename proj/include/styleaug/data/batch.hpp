#pragma once

#include <functional>
#include <string>
#include <vector>

#include "styleaug/data/dataset.hpp"
#include "styleaug/random.hpp"

namespace styleaug::data {

/// A stacked mini-batch: images are [B x C x H x W].
struct Batch {
  nn::Tensor images;
  std::vector<int> labels;
  std::vector<int> domain_ids;
  std::vector<int> image_ids;

  int size() const { return static_cast<int>(labels.size()); }
};

Batch make_batch(const std::vector<const LabeledImage*>& items);
Batch make_batch(const std::vector<LabeledImage>& items);

/// Draws balanced batches: exactly `per_domain` samples from every source.
/// Each source is visited in a shuffled order that is redrawn once exhausted.
/// A source smaller than `per_domain` is sampled with replacement instead.
class BalancedBatchIterator {
 public:
  using Warn = std::function<void(const std::string&)>;

  BalancedBatchIterator(std::vector<const std::vector<LabeledImage>*> sources, int per_domain, Rng rng,
                        const Warn& warn = {});

  Batch next();
  int batch_size() const { return per_domain_ * static_cast<int>(sources_.size()); }
  bool with_replacement(std::size_t source) const { return with_replacement_.at(source); }

 private:
  std::vector<const std::vector<LabeledImage>*> sources_;
  int per_domain_;
  Rng rng_;
  std::vector<std::vector<std::size_t>> order_;
  std::vector<std::size_t> cursor_;
  std::vector<bool> with_replacement_;
};

/// The "Original" augmentation: pad by `padding` (zeros), take a random crop of
/// the original size, then flip horizontally with probability 1/2.
void random_crop_flip(nn::Tensor& images, Rng& rng, int padding = 4, bool flip = true);

}  // namespace styleaug::data
