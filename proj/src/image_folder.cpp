#include "styleaug/data/image_folder.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace styleaug::data {

namespace fs = std::filesystem;

namespace {

std::vector<fs::path> sorted_entries(const fs::path& dir, bool directories) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (directories ? e.is_directory() : e.is_regular_file()) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

nn::Tensor to_tensor(const cv::Mat& bgr, int resolution) {
  cv::Mat resized;
  cv::resize(bgr, resized, cv::Size(resolution, resolution), 0, 0, cv::INTER_AREA);
  nn::Tensor t({3, resolution, resolution});
  const std::size_t plane = static_cast<std::size_t>(resolution) * resolution;
  for (int y = 0; y < resolution; ++y)
    for (int x = 0; x < resolution; ++x) {
      const cv::Vec3b px = resized.at<cv::Vec3b>(y, x);
      for (int c = 0; c < 3; ++c) t[c * plane + y * resolution + x] = px[2 - c] / 255.0f;  // BGR -> RGB
    }
  return t;
}

}  // namespace

MultiDomainDataset load_image_folder(const fs::path& root, const ImageFolderOptions& options) {
  if (!fs::is_directory(root)) throw std::invalid_argument("dataset root " + root.string() + " is not a directory");
  MultiDomainDataset ds;
  std::size_t skipped = 0;
  int id = 0;
  const auto domain_dirs = sorted_entries(root, true);
  if (domain_dirs.empty()) throw std::invalid_argument("dataset root " + root.string() + " has no domain directories");
  for (const auto& domain_dir : domain_dirs) {
    const int d = static_cast<int>(ds.domain_names.size());
    std::vector<std::string> classes;
    for (const auto& c : sorted_entries(domain_dir, true)) classes.push_back(c.filename().string());
    if (classes.empty()) throw std::invalid_argument("domain directory " + domain_dir.string() + " has no class directories");
    if (ds.class_names.empty()) ds.class_names = classes;
    else if (classes != ds.class_names)
      throw std::invalid_argument("domain '" + domain_dir.filename().string() +
                                  "' has a class set different from domain '" + ds.domain_names.front() + "'");
    ds.domain_names.push_back(domain_dir.filename().string());
    std::vector<LabeledImage> images;
    for (std::size_t c = 0; c < classes.size(); ++c) {
      const fs::path class_dir = domain_dir / classes[c];
      const auto files = sorted_entries(class_dir, false);
      std::size_t loaded = 0;
      for (const auto& file : files) {
        cv::Mat img = cv::imread(file.string(), cv::IMREAD_COLOR);
        if (img.empty()) {
          ++skipped;
          if (options.warn) options.warn("skipping undecodable file " + file.string());
          continue;
        }
        images.push_back({to_tensor(img, options.resolution), static_cast<int>(c), d, id++});
        ++loaded;
      }
      if (loaded == 0) throw std::invalid_argument("class directory " + class_dir.string() + " has no readable images");
    }
    ds.domains.push_back(std::move(images));
  }
  ds.metadata = {{"generator", "image-folder"},
                 {"root", root.string()},
                 {"resolution", std::to_string(options.resolution)},
                 {"skipped_files", std::to_string(skipped)}};
  return ds;
}

void write_png(const nn::Tensor& image, const fs::path& path) {
  if (image.rank() != 3 || image.dim(0) != 3) throw nn::ShapeError("write_png expects a 3 x H x W image");
  const int h = image.dim(1), w = image.dim(2);
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  cv::Mat out(h, w, CV_8UC3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      cv::Vec3b& px = out.at<cv::Vec3b>(y, x);
      for (int c = 0; c < 3; ++c)
        px[2 - c] = static_cast<unsigned char>(std::lround(std::clamp(image[c * plane + y * w + x], 0.0f, 1.0f) * 255.0f));
    }
  if (!cv::imwrite(path.string(), out)) throw std::runtime_error("failed to write " + path.string());
}

void export_image_folder(const MultiDomainDataset& dataset, const fs::path& root) {
  fs::create_directories(root);
  nlohmann::json manifest;
  manifest["metadata"] = dataset.metadata;
  manifest["classes"] = dataset.class_names;
  for (int d = 0; d < dataset.num_domains(); ++d) {
    std::vector<int> counts(dataset.num_classes(), 0);
    for (const auto& img : dataset.domains[d]) {
      const fs::path dir = root / dataset.domain_names[d] / dataset.class_names[img.label];
      fs::create_directories(dir);
      std::ostringstream name;
      name << std::setw(6) << std::setfill('0') << img.id << ".png";
      write_png(img.pixels, dir / name.str());
      ++counts[img.label];
    }
    manifest["domains"][dataset.domain_names[d]] = counts;
  }
  manifest["total_images"] = dataset.total_images();
  std::ofstream out(root / "manifest.json");
  if (!out) throw std::runtime_error("cannot write manifest in " + root.string());
  out << manifest.dump(2) << '\n';
}

}  // namespace styleaug::data
