#pragma once

#include <map>
#include <string>
#include <vector>

#include "styleaug/nn/tensor.hpp"

namespace styleaug::data {

/// A C x H x W image in [0,1] with its class label and domain index.
struct LabeledImage {
  nn::Tensor pixels;
  int label = 0;
  int domain = 0;
  int id = 0;  // unique within its dataset
};

/// n named domains over a shared class list.
struct MultiDomainDataset {
  std::vector<std::string> domain_names;
  std::vector<std::string> class_names;
  std::vector<std::vector<LabeledImage>> domains;
  std::map<std::string, std::string> metadata;

  int num_domains() const { return static_cast<int>(domains.size()); }
  int num_classes() const { return static_cast<int>(class_names.size()); }
  std::size_t total_images() const;
  int domain_index(const std::string& name) const;  // throws std::out_of_range for unknown names
  nn::Shape image_shape() const;
};

/// Checks every structural invariant (label ranges, domain ids, unique ids, shapes).
void validate(const MultiDomainDataset& dataset);

}  // namespace styleaug::data
