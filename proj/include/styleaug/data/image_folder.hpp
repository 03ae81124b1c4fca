#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include "styleaug/data/dataset.hpp"

namespace styleaug::data {

struct ImageFolderOptions {
  int resolution = 32;
  std::function<void(const std::string&)> warn;  // receives one message per skipped file
};

/// Reads root/<domain>/<class>/<image>. Domains, classes and files are taken in
/// lexicographic order; images are resized to resolution x resolution RGB in [0,1].
/// Undecodable files are skipped (counted in metadata["skipped_files"]).
MultiDomainDataset load_image_folder(const std::filesystem::path& root, const ImageFolderOptions& options = {});

/// Writes the dataset in the same layout as PNG files plus a manifest.json.
void export_image_folder(const MultiDomainDataset& dataset, const std::filesystem::path& root);

/// Saves one C x H x W image in [0,1] as PNG (grids and previews).
void write_png(const nn::Tensor& image, const std::filesystem::path& path);

}  // namespace styleaug::data
