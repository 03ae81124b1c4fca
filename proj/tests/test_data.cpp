#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "styleaug/data/batch.hpp"
#include "styleaug/data/image_folder.hpp"
#include "styleaug/data/protocol.hpp"
#include "styleaug/data/synthetic.hpp"

using namespace styleaug;
using namespace styleaug::data;
namespace fs = std::filesystem;

namespace {

SyntheticSpec small_spec(int per_class = 10) {
  SyntheticSpec spec;
  spec.images_per_class = per_class;
  return spec;
}

std::set<int> ids_of(const std::vector<LabeledImage>& images) {
  std::set<int> out;
  for (const auto& img : images) out.insert(img.id);
  return out;
}

// Normalized central moments of a coverage mask: invariant to translation and scale.
std::vector<double> shape_moments(const std::vector<float>& mask, int res) {
  double m00 = 0, mx = 0, my = 0;
  for (int y = 0; y < res; ++y)
    for (int x = 0; x < res; ++x) {
      const double w = mask[y * res + x];
      m00 += w;
      mx += w * x;
      my += w * y;
    }
  mx /= m00;
  my /= m00;
  const std::array<std::pair<int, int>, 10> orders{{{2, 0}, {0, 2}, {1, 1}, {3, 0}, {0, 3}, {2, 1}, {1, 2}, {4, 0}, {0, 4}, {2, 2}}};
  std::vector<double> f;
  for (auto [p, q] : orders) {
    double mu = 0;
    for (int y = 0; y < res; ++y)
      for (int x = 0; x < res; ++x) mu += mask[y * res + x] * std::pow(x - mx, p) * std::pow(y - my, q);
    f.push_back(mu / std::pow(m00, 1.0 + (p + q) / 2.0));
  }
  return f;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("styleaug_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_solid(const fs::path& file, float value) {
  fs::create_directories(file.parent_path());
  write_png(nn::Tensor({3, 4, 4}, value), file);
}

}  // namespace

TEST(Synthetic, SameSeedBitIdentical) {
  const auto a = generate_synthetic_domains(small_spec(3), 11);
  const auto b = generate_synthetic_domains(small_spec(3), 11);
  const auto c = generate_synthetic_domains(small_spec(3), 12);
  ASSERT_EQ(a.domains.size(), b.domains.size());
  bool any_diff = false;
  for (std::size_t d = 0; d < a.domains.size(); ++d)
    for (std::size_t i = 0; i < a.domains[d].size(); ++i) {
      EXPECT_EQ(a.domains[d][i].pixels, b.domains[d][i].pixels);
      EXPECT_EQ(a.domains[d][i].label, b.domains[d][i].label);
      any_diff |= !(a.domains[d][i].pixels == c.domains[d][i].pixels);
    }
  EXPECT_TRUE(any_diff);
  EXPECT_EQ(a.metadata, b.metadata);
}

TEST(Synthetic, CountsAndInvariants) {
  const auto ds = generate_synthetic_domains(small_spec(50), 1);
  EXPECT_EQ(ds.total_images(), 1400u);
  EXPECT_EQ(ds.num_domains(), 4);
  EXPECT_EQ(ds.num_classes(), 7);
  EXPECT_EQ(ds.image_shape(), (nn::Shape{3, 32, 32}));
  EXPECT_NO_THROW(validate(ds));
  for (const auto& d : ds.domains)
    for (const auto& img : d) {
      for (float v : img.pixels.storage()) {
        ASSERT_GE(v, 0.0f);
        ASSERT_LE(v, 1.0f);
      }
    }
}

TEST(Synthetic, Errors) {
  SyntheticSpec spec;
  spec.num_classes = 1;
  EXPECT_THROW(generate_synthetic_domains(spec, 0), std::invalid_argument);
  spec = {};
  spec.num_domains = 1;
  EXPECT_THROW(generate_synthetic_domains(spec, 0), std::invalid_argument);
}

TEST(Synthetic, DomainShiftIsReal) {
  // Nearest class centroid on raw pixels, fitted on half of the photo domain.
  const auto ds = generate_synthetic_domains(small_spec(40), 2);
  const std::size_t dim = ds.domains[0][0].pixels.size();
  std::vector<std::vector<double>> centroid(7, std::vector<double>(dim, 0.0));
  std::vector<int> counts(7, 0);
  for (const auto& img : ds.domains[0])
    if (img.id % 2 == 0) {
      for (std::size_t k = 0; k < dim; ++k) centroid[img.label][k] += img.pixels[k];
      ++counts[img.label];
    }
  for (int c = 0; c < 7; ++c)
    for (auto& v : centroid[c]) v /= counts[c];
  const auto accuracy = [&](int domain, bool odd_only) {
    int correct = 0, n = 0;
    for (const auto& img : ds.domains[domain]) {
      if (odd_only && img.id % 2 == 0) continue;
      int best = 0;
      double best_d = 1e300;
      for (int c = 0; c < 7; ++c) {
        double d = 0;
        for (std::size_t k = 0; k < dim; ++k) d += (img.pixels[k] - centroid[c][k]) * (img.pixels[k] - centroid[c][k]);
        if (d < best_d) best_d = d, best = c;
      }
      correct += best == img.label;
      ++n;
    }
    return static_cast<double>(correct) / n;
  };
  const double in_domain = accuracy(0, true);
  for (int d = 1; d < 4; ++d) EXPECT_LT(accuracy(d, false), in_domain) << ds.domain_names[d];
}

TEST(Synthetic, LabelRecoverableFromShapeMoments) {
  // Prototypes: one large, centred render per class.
  const int proto_res = 256;
  std::vector<std::vector<double>> protos;
  for (int c = 0; c < 7; ++c)
    protos.push_back(shape_moments(render_shape_mask(c, {128.0, 128.0, 90.0}, proto_res), proto_res));
  // Per-feature scale so every moment contributes comparably; the floor keeps
  // moments that vanish by symmetry from amplifying rasterization noise.
  std::vector<double> scale(protos[0].size(), 1e-2);
  for (const auto& p : protos)
    for (std::size_t k = 0; k < p.size(); ++k) scale[k] = std::max(scale[k], std::abs(p[k]));

  const SyntheticSpec spec = small_spec(40);
  const auto ds = generate_synthetic_domains(spec, 3);
  int correct = 0, n = 0;
  for (int d = 0; d < spec.num_domains; ++d)
    for (int c = 0; c < spec.num_classes; ++c)
      for (int i = 0; i < spec.images_per_class; ++i) {
        const auto g = synthetic_geometry(spec, 3, d, c, i);
        const auto f = shape_moments(render_shape_mask(c, g, spec.resolution), spec.resolution);
        int best = -1;
        double best_d = 1e300;
        for (int k = 0; k < 7; ++k) {
          double dist = 0;
          for (std::size_t j = 0; j < f.size(); ++j) dist += std::pow((f[j] - protos[k][j]) / scale[j], 2);
          if (dist < best_d) best_d = dist, best = k;
        }
        correct += best == c;
        ++n;
      }
  EXPECT_EQ(correct, n);
}

TEST(LeaveOneOut, WholeModePartitionsTheDataset) {
  const auto ds = generate_synthetic_domains(small_spec(5), 4);
  const auto loo = leave_one_out_split(ds, "sketch");
  ASSERT_EQ(loo.sources.size(), 3u);
  EXPECT_EQ(loo.target_domain, 3);
  std::set<int> seen = ids_of(loo.target_test);
  std::size_t count = loo.target_test.size();
  for (const auto& s : loo.sources) {
    EXPECT_NE(s.domain, loo.target_domain);
    for (int id : ids_of(s.images)) EXPECT_TRUE(seen.insert(id).second) << "duplicate id " << id;
    count += s.images.size();
  }
  EXPECT_EQ(count, ds.total_images());
  EXPECT_EQ(seen.size(), ds.total_images());
  EXPECT_THROW(leave_one_out_split(ds, "nowhere"), std::out_of_range);
}

TEST(LeaveOneOut, PredefinedModeHoldsOutThirtyPercent) {
  SyntheticSpec spec = small_spec(20);
  spec.num_classes = 5;  // 100 images per domain
  const auto ds = generate_synthetic_domains(spec, 5);
  const auto a = leave_one_out_split(ds, "art", TargetMode::Predefined, 9);
  const auto b = leave_one_out_split(ds, "art", TargetMode::Predefined, 9);
  EXPECT_EQ(a.target_test.size(), 30u);
  EXPECT_EQ(ids_of(a.target_test), ids_of(b.target_test));
  for (const auto& s : a.sources) EXPECT_EQ(s.images.size(), 70u);
  // The target's test cut does not depend on which domain is held out.
  const auto other = leave_one_out_split(ds, "photo", TargetMode::Predefined, 9);
  for (const auto& s : other.sources)
    if (s.name == "art") {
      std::set<int> train = ids_of(s.images);
      for (int id : ids_of(a.target_test)) EXPECT_EQ(train.count(id), 0u);
    }
}

TEST(TrainValSplit, NinetyTenPartition) {
  const auto ds = generate_synthetic_domains(small_spec(15), 6);
  const std::vector<LabeledImage> domain(ds.domains[0].begin(), ds.domains[0].begin() + 100);
  Rng rng(1);
  std::vector<LabeledImage> train, val;
  train_val_split(domain, 0.9, rng, train, val);
  EXPECT_EQ(train.size(), 90u);
  EXPECT_EQ(val.size(), 10u);
  std::set<int> all = ids_of(train);
  for (int id : ids_of(val)) EXPECT_TRUE(all.insert(id).second);
  EXPECT_EQ(all, ids_of(domain));

  Rng other(2);
  std::vector<LabeledImage> train2, val2;
  train_val_split(domain, 0.9, other, train2, val2);
  EXPECT_NE(ids_of(val), ids_of(val2));
}

TEST(TrainValSplit, Errors) {
  Rng rng(3);
  std::vector<LabeledImage> train, val;
  const std::vector<LabeledImage> one(1);
  EXPECT_THROW(train_val_split(one, 0.9, rng, train, val), std::invalid_argument);
  const std::vector<LabeledImage> two(2);
  EXPECT_THROW(train_val_split(two, 1.0, rng, train, val), std::invalid_argument);
}

TEST(ProtocolSplit, NoTargetLeakageAndValFraction) {
  const auto ds = generate_synthetic_domains(small_spec(10), 7);
  const auto loo = leave_one_out_split(ds, "cartoon");
  Rng rng(4);
  const auto split = make_protocol_split(loo, 0.9, rng);
  const auto target_ids = ids_of(split.target_test);
  for (const auto& s : split.sources) {
    const double n = static_cast<double>(s.train.size() + s.val.size());
    EXPECT_LE(std::abs(s.val.size() - 0.1 * n), 1.0);
    for (int id : ids_of(s.train)) EXPECT_EQ(target_ids.count(id), 0u);
    for (int id : ids_of(s.val)) EXPECT_EQ(target_ids.count(id), 0u);
  }
  EXPECT_EQ(all_source_images(split).size(), 210u);
}

TEST(BatchIterator, BalancedBatchesOfNinetySix) {
  const auto ds = generate_synthetic_domains(small_spec(10), 8);
  std::vector<const std::vector<LabeledImage>*> sources{&ds.domains[0], &ds.domains[1], &ds.domains[2]};
  BalancedBatchIterator it(sources, 32, Rng(5));
  EXPECT_EQ(it.batch_size(), 96);
  for (int b = 0; b < 50; ++b) {
    const Batch batch = it.next();
    ASSERT_EQ(batch.size(), 96);
    EXPECT_EQ(batch.images.shape(), (nn::Shape{96, 3, 32, 32}));
    std::array<int, 4> per{};
    for (int d : batch.domain_ids) ++per[d];
    EXPECT_EQ(per[0], 32);
    EXPECT_EQ(per[1], 32);
    EXPECT_EQ(per[2], 32);
    EXPECT_EQ(per[3], 0);
  }
}

TEST(BatchIterator, EveryImageSeenWithinAnEpoch) {
  const auto ds = generate_synthetic_domains(small_spec(10), 9);
  std::vector<const std::vector<LabeledImage>*> sources{&ds.domains[1], &ds.domains[2]};
  BalancedBatchIterator it(sources, 8, Rng(6));
  EXPECT_FALSE(it.with_replacement(0));
  std::set<int> seen;
  const int batches = (70 + 7) / 8;
  for (int b = 0; b < batches; ++b)
    for (int id : it.next().image_ids) seen.insert(id);
  std::set<int> expected = ids_of(ds.domains[1]);
  for (int id : ids_of(ds.domains[2])) expected.insert(id);
  EXPECT_EQ(seen, expected);
}

TEST(BatchIterator, SmallSourceFallsBackToReplacementWithWarning) {
  const auto ds = generate_synthetic_domains(small_spec(1), 10);
  std::vector<const std::vector<LabeledImage>*> sources{&ds.domains[0]};
  std::vector<std::string> warnings;
  BalancedBatchIterator it(sources, 10, Rng(7), [&](const std::string& w) { warnings.push_back(w); });
  EXPECT_TRUE(it.with_replacement(0));
  EXPECT_EQ(warnings.size(), 1u);
  EXPECT_EQ(it.next().size(), 10);
  EXPECT_THROW(BalancedBatchIterator(sources, 0, Rng(7)), std::invalid_argument);
}

TEST(CropFlip, KeepsShapeAndIsSeeded) {
  const auto ds = generate_synthetic_domains(small_spec(2), 11);
  Batch a = make_batch(ds.domains[0]);
  Batch b = a;
  const nn::Tensor original = a.images;
  Rng r1(8), r2(8);
  random_crop_flip(a.images, r1);
  random_crop_flip(b.images, r2);
  EXPECT_EQ(a.images, b.images);
  EXPECT_EQ(a.images.shape(), original.shape());
  EXPECT_NE(a.images, original);
}

TEST(ImageFolder, LoadsInLexicographicOrder) {
  TempDir dir;
  write_solid(dir.path / "b_domain" / "cat" / "1.png", 0.2f);
  write_solid(dir.path / "b_domain" / "dog" / "1.png", 0.4f);
  write_solid(dir.path / "a_domain" / "cat" / "2.png", 0.6f);
  write_solid(dir.path / "a_domain" / "cat" / "1.png", 0.8f);
  write_solid(dir.path / "a_domain" / "dog" / "1.png", 1.0f);
  const auto ds = load_image_folder(dir.path, {8, {}});
  EXPECT_EQ(ds.domain_names, (std::vector<std::string>{"a_domain", "b_domain"}));
  EXPECT_EQ(ds.class_names, (std::vector<std::string>{"cat", "dog"}));
  EXPECT_EQ(ds.total_images(), 5u);
  EXPECT_EQ(ds.image_shape(), (nn::Shape{3, 8, 8}));
  EXPECT_NEAR(ds.domains[0][0].pixels[0], 0.8f, 1.0 / 255);  // 1.png before 2.png
  EXPECT_NEAR(ds.domains[0][1].pixels[0], 0.6f, 1.0 / 255);
  EXPECT_EQ(ds.domains[1][1].label, 1);
}

TEST(ImageFolder, TwoByTwoByOne) {
  TempDir dir;
  for (const char* d : {"x", "y"})
    for (const char* c : {"p", "q"}) write_solid(dir.path / d / c / "img.png", 0.5f);
  EXPECT_EQ(load_image_folder(dir.path).total_images(), 4u);
}

TEST(ImageFolder, InconsistentClassesNameTheOffender) {
  TempDir dir;
  write_solid(dir.path / "x" / "p" / "img.png", 0.5f);
  write_solid(dir.path / "y" / "q" / "img.png", 0.5f);
  try {
    load_image_folder(dir.path);
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("'y'"), std::string::npos) << e.what();
  }
}

TEST(ImageFolder, SkipsUndecodableFiles) {
  TempDir dir;
  write_solid(dir.path / "x" / "p" / "good.png", 0.5f);
  std::ofstream(dir.path / "x" / "p" / "junk.png") << "not an image";
  std::vector<std::string> warnings;
  ImageFolderOptions options;
  options.warn = [&](const std::string& w) { warnings.push_back(w); };
  const auto ds = load_image_folder(dir.path, options);
  EXPECT_EQ(ds.total_images(), 1u);
  EXPECT_EQ(ds.metadata.at("skipped_files"), "1");
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(ImageFolder, EmptyDirectoriesAreErrors) {
  TempDir dir;
  EXPECT_THROW(load_image_folder(dir.path), std::invalid_argument);
  fs::create_directories(dir.path / "x" / "p");
  EXPECT_THROW(load_image_folder(dir.path), std::invalid_argument);
  EXPECT_THROW(load_image_folder(dir.path / "missing"), std::invalid_argument);
}

TEST(ImageFolder, ExportRoundTrip) {
  TempDir dir;
  const auto ds = generate_synthetic_domains(small_spec(2), 12);
  export_image_folder(ds, dir.path);
  EXPECT_TRUE(fs::exists(dir.path / "manifest.json"));
  const auto back = load_image_folder(dir.path);
  EXPECT_EQ(back.total_images(), ds.total_images());
  EXPECT_EQ(back.class_names.size(), ds.class_names.size());
  std::set<std::string> names(ds.domain_names.begin(), ds.domain_names.end());
  EXPECT_EQ(std::set<std::string>(back.domain_names.begin(), back.domain_names.end()), names);
}
