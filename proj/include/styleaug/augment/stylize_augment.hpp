#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "styleaug/adain/style_model.hpp"
#include "styleaug/data/batch.hpp"
#include "styleaug/random.hpp"

namespace styleaug::augment {

struct AugmentationPolicy {
  double p = 0.75;      // per-sample replacement probability
  double alpha = 1.0;   // stylization strength
  std::uint64_t rng_seed = 0;

  /// Throws std::invalid_argument unless 0 <= p <= 1 and 0 <= alpha <= 1.
  void validate() const;
};

struct AugmentedBatch {
  nn::Tensor images;
  std::vector<int> labels;
  std::vector<int> domain_ids;
  std::vector<int> image_ids;
  std::vector<bool> stylized_mask;
  std::vector<std::optional<int>> style_provider_index;

  int size() const { return static_cast<int>(labels.size()); }
};

/// Uniform over {0..batch_size-1} without `content_index`.
int pick_style_provider(int batch_size, int content_index, Rng& rng);

/// Replaces each sample with probability p by its stylization against a
/// provider drawn from the rest of the batch. Providers contribute their
/// un-stylized images. Labels and domains pass through unchanged.
AugmentedBatch augment_batch(const data::Batch& batch, const adain::StyleTransferModel& model,
                             const AugmentationPolicy& policy, Rng& rng);

struct AugmentationReport {
  std::size_t batches = 0;
  std::size_t samples = 0;
  std::size_t stylized = 0;
  std::size_t cross_domain = 0;  // stylized samples whose provider came from another domain

  double rate() const;
  double cross_domain_fraction() const;  // 0 when nothing was stylized
};

/// Running tally, so long runs need not keep every batch around.
class AugmentationTally {
 public:
  void add(const AugmentedBatch& batch);
  const AugmentationReport& report() const { return report_; }

 private:
  AugmentationReport report_;
};

/// Throws std::invalid_argument on an empty history.
AugmentationReport augmentation_stats(std::span<const AugmentedBatch> history);

/// The structured-text block written to run logs.
std::string format_report(const AugmentationReport& report);

}  // namespace styleaug::augment
