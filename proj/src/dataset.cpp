#include "styleaug/data/dataset.hpp"

#include <set>
#include <stdexcept>

namespace styleaug::data {

std::size_t MultiDomainDataset::total_images() const {
  std::size_t n = 0;
  for (const auto& d : domains) n += d.size();
  return n;
}

int MultiDomainDataset::domain_index(const std::string& name) const {
  for (std::size_t i = 0; i < domain_names.size(); ++i)
    if (domain_names[i] == name) return static_cast<int>(i);
  throw std::out_of_range("unknown domain '" + name + "'");
}

nn::Shape MultiDomainDataset::image_shape() const {
  for (const auto& d : domains)
    if (!d.empty()) return d.front().pixels.shape();
  throw std::logic_error("dataset has no images");
}

void validate(const MultiDomainDataset& dataset) {
  if (dataset.domain_names.size() != dataset.domains.size())
    throw std::invalid_argument("domain name count does not match domain count");
  std::set<int> ids;
  const nn::Shape shape = dataset.image_shape();
  for (int d = 0; d < dataset.num_domains(); ++d) {
    std::set<int> labels;
    for (const auto& img : dataset.domains[d]) {
      if (img.domain != d) throw std::invalid_argument("image " + std::to_string(img.id) + " has a wrong domain id");
      if (img.label < 0 || img.label >= dataset.num_classes())
        throw std::invalid_argument("image " + std::to_string(img.id) + " has an out-of-range label");
      if (img.pixels.shape() != shape) throw std::invalid_argument("images differ in shape");
      if (!ids.insert(img.id).second) throw std::invalid_argument("duplicate image id " + std::to_string(img.id));
      labels.insert(img.label);
    }
    if (static_cast<int>(labels.size()) != dataset.num_classes())
      throw std::invalid_argument("domain '" + dataset.domain_names[d] + "' does not cover every class");
  }
}

}  // namespace styleaug::data
