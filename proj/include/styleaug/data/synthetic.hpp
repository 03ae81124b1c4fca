#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "styleaug/data/dataset.hpp"

namespace styleaug::data {

/// Desk-scale stand-in for a PACS-style testbed: the class is a geometric
/// shape, the domain is a rendering style (palette, textures, stroke).
struct SyntheticSpec {
  int num_classes = 7;
  int num_domains = 4;
  int images_per_class = 100;  // per domain
  int resolution = 32;
};

/// Placement of the class shape inside one image.
struct ShapeGeometry {
  double center_x = 0.0;
  double center_y = 0.0;
  double radius = 0.0;
};

/// Names of the built-in shape prototypes, in class-index order.
const std::vector<std::string>& synthetic_class_names();
/// Names of the built-in rendering styles, in domain-index order.
const std::vector<std::string>& synthetic_domain_names();

/// Deterministic given (spec, seed). Image ids run domain-major, then class, then index.
MultiDomainDataset generate_synthetic_domains(const SyntheticSpec& spec, std::uint64_t seed);

/// Geometry of image `index` of class `label` in domain `domain`; independent of rendering.
ShapeGeometry synthetic_geometry(const SyntheticSpec& spec, std::uint64_t seed, int domain, int label, int index);

/// Anti-aliased shape coverage in [0,1], resolution x resolution, row-major.
std::vector<float> render_shape_mask(int label, const ShapeGeometry& geometry, int resolution);

}  // namespace styleaug::data
