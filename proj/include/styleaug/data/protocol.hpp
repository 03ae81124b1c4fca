#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "styleaug/data/dataset.hpp"
#include "styleaug/random.hpp"

namespace styleaug::data {

/// How the held-out domain is evaluated.
enum class TargetMode {
  Whole,     // test on every image of the left-out domain
  Predefined // every domain is pre-split 70/30 once; sources train on the 70%, the target tests on its 30%
};

std::string to_string(TargetMode mode);
TargetMode target_mode_from_string(const std::string& name);

struct SourceDomain {
  std::string name;
  int domain = 0;
  std::vector<LabeledImage> images;
};

/// Sources and target before the per-run train/val split.
struct LeaveOneOut {
  std::vector<SourceDomain> sources;
  std::string target_name;
  int target_domain = 0;
  std::vector<LabeledImage> target_test;
};

struct SourceSplit {
  std::string name;
  int domain = 0;
  std::vector<LabeledImage> train;
  std::vector<LabeledImage> val;
};

struct ProtocolSplit {
  std::vector<SourceSplit> sources;
  std::string target_name;
  int target_domain = 0;
  std::vector<LabeledImage> target_test;
};

inline constexpr double kPredefinedTestFraction = 0.30;

/// The remaining domains become sources. In Predefined mode the 70/30 cut is
/// seeded from `dataset_seed` and is identical across runs.
LeaveOneOut leave_one_out_split(const MultiDomainDataset& dataset, const std::string& target_name,
                                TargetMode mode = TargetMode::Whole, std::uint64_t dataset_seed = 0);

/// Random partition with round(ratio * N) training images (clamped so both sides are non-empty).
void train_val_split(const std::vector<LabeledImage>& domain, double ratio, Rng& rng,
                     std::vector<LabeledImage>& train, std::vector<LabeledImage>& val);

/// Splits every source of `loo` into train/val with a freshly drawn partition.
ProtocolSplit make_protocol_split(const LeaveOneOut& loo, double train_ratio, Rng& rng);

/// Every source image (train and val) of a split, in source order.
std::vector<LabeledImage> all_source_images(const ProtocolSplit& split);

}  // namespace styleaug::data
