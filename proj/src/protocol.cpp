#include "styleaug/data/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace styleaug::data {

std::string to_string(TargetMode mode) { return mode == TargetMode::Whole ? "whole" : "predefined"; }

TargetMode target_mode_from_string(const std::string& name) {
  if (name == "whole") return TargetMode::Whole;
  if (name == "predefined") return TargetMode::Predefined;
  throw std::invalid_argument("unknown target mode '" + name + "' (expected whole|predefined)");
}

namespace {

/// Deterministic 70/30 cut of one domain; returns (train_part, test_part).
std::pair<std::vector<LabeledImage>, std::vector<LabeledImage>> predefined_cut(const std::vector<LabeledImage>& images,
                                                                               std::uint64_t dataset_seed, int domain) {
  Rng rng(derive_seed(dataset_seed, {0x7E57, static_cast<std::uint64_t>(domain)}));
  std::vector<std::size_t> order(images.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_test = static_cast<std::size_t>(std::lround(kPredefinedTestFraction * images.size()));
  std::vector<LabeledImage> train, test;
  for (std::size_t i = 0; i < order.size(); ++i) (i < n_test ? test : train).push_back(images[order[i]]);
  auto by_id = [](const LabeledImage& a, const LabeledImage& b) { return a.id < b.id; };
  std::sort(train.begin(), train.end(), by_id);
  std::sort(test.begin(), test.end(), by_id);
  return {std::move(train), std::move(test)};
}

}  // namespace

LeaveOneOut leave_one_out_split(const MultiDomainDataset& dataset, const std::string& target_name, TargetMode mode,
                                std::uint64_t dataset_seed) {
  LeaveOneOut loo;
  loo.target_domain = dataset.domain_index(target_name);
  loo.target_name = target_name;
  for (int d = 0; d < dataset.num_domains(); ++d) {
    const auto& images = dataset.domains[d];
    if (mode == TargetMode::Whole) {
      if (d == loo.target_domain) loo.target_test = images;
      else loo.sources.push_back({dataset.domain_names[d], d, images});
    } else {
      auto [train_part, test_part] = predefined_cut(images, dataset_seed, d);
      if (d == loo.target_domain) loo.target_test = std::move(test_part);
      else loo.sources.push_back({dataset.domain_names[d], d, std::move(train_part)});
    }
  }
  return loo;
}

void train_val_split(const std::vector<LabeledImage>& domain, double ratio, Rng& rng, std::vector<LabeledImage>& train,
                     std::vector<LabeledImage>& val) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("train ratio must lie in (0, 1)");
  if (domain.size() < 2) throw std::invalid_argument("cannot split a domain with fewer than 2 images");
  std::vector<std::size_t> order(domain.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  auto n_train = static_cast<std::size_t>(std::lround(ratio * static_cast<double>(domain.size())));
  n_train = std::clamp<std::size_t>(n_train, 1, domain.size() - 1);
  train.clear();
  val.clear();
  for (std::size_t i = 0; i < order.size(); ++i) (i < n_train ? train : val).push_back(domain[order[i]]);
}

ProtocolSplit make_protocol_split(const LeaveOneOut& loo, double train_ratio, Rng& rng) {
  ProtocolSplit split;
  split.target_name = loo.target_name;
  split.target_domain = loo.target_domain;
  split.target_test = loo.target_test;
  for (const auto& src : loo.sources) {
    SourceSplit s{src.name, src.domain, {}, {}};
    train_val_split(src.images, train_ratio, rng, s.train, s.val);
    split.sources.push_back(std::move(s));
  }
  return split;
}

std::vector<LabeledImage> all_source_images(const ProtocolSplit& split) {
  std::vector<LabeledImage> out;
  for (const auto& s : split.sources) {
    out.insert(out.end(), s.train.begin(), s.train.end());
    out.insert(out.end(), s.val.begin(), s.val.end());
  }
  return out;
}

}  // namespace styleaug::data
