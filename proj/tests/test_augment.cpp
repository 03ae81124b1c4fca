#include <gtest/gtest.h>

#include <cmath>

#include "styleaug/augment/stylize_augment.hpp"
#include "styleaug/data/synthetic.hpp"

using namespace styleaug;
using namespace styleaug::augment;
using nn::Tensor;

namespace {

// Binomial 3-sigma band around n * prob.
void expect_binomial(std::size_t hits, std::size_t n, double prob, const std::string& what) {
  const double sigma = std::sqrt(n * prob * (1 - prob));
  EXPECT_NEAR(static_cast<double>(hits), n * prob, 3 * sigma) << what;
}

class AugmentTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    data::SyntheticSpec spec;
    spec.images_per_class = 2;
    spec.resolution = 16;
    dataset_ = new data::MultiDomainDataset(data::generate_synthetic_domains(spec, 1));
    adain::StyleTrainingConfig config;
    config.epochs = 1;
    config.batch_size = 4;
    config.encoder_pretrain_iterations = 10;
    config.architecture.resolution = 16;
    config.architecture.widths = {4, 8};
    std::vector<data::LabeledImage> images;
    for (int d = 0; d < 3; ++d) images.insert(images.end(), dataset_->domains[d].begin(), dataset_->domains[d].end());
    model_ = new adain::StyleTransferModel(adain::train_style_model(images, 7, config).model);
  }
  static void TearDownTestSuite() {
    delete dataset_;
    delete model_;
  }

  // Balanced batch over the first three domains.
  static data::Batch batch(int per_domain, Rng& rng) {
    std::vector<const std::vector<data::LabeledImage>*> sources{&dataset_->domains[0], &dataset_->domains[1],
                                                                &dataset_->domains[2]};
    return data::BalancedBatchIterator(sources, per_domain, Rng(rng())).next();
  }

  static data::MultiDomainDataset* dataset_;
  static adain::StyleTransferModel* model_;
};

data::MultiDomainDataset* AugmentTest::dataset_ = nullptr;
adain::StyleTransferModel* AugmentTest::model_ = nullptr;

}  // namespace

TEST(StyleProvider, PairBatchAlwaysPicksTheOther) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(pick_style_provider(2, 0, rng), 1);
    EXPECT_EQ(pick_style_provider(2, 1, rng), 0);
  }
}

TEST(StyleProvider, UniformOverOtherIndices) {
  Rng rng(2);
  const int draws = 100000;
  std::vector<std::size_t> counts(8, 0);
  for (int i = 0; i < draws; ++i) ++counts[pick_style_provider(8, 3, rng)];
  EXPECT_EQ(counts[3], 0u);
  for (int k = 0; k < 8; ++k)
    if (k != 3) expect_binomial(counts[k], draws, 1.0 / 7, "candidate " + std::to_string(k));
}

TEST(StyleProvider, NeverSelf) {
  Rng rng(3);
  std::uniform_int_distribution<int> size(2, 40);
  for (int i = 0; i < 10000; ++i) {
    const int b = size(rng);
    const int c = static_cast<int>(rng() % b);
    const int s = pick_style_provider(b, c, rng);
    ASSERT_NE(s, c);
    ASSERT_GE(s, 0);
    ASSERT_LT(s, b);
  }
}

TEST(StyleProvider, Errors) {
  Rng rng(4);
  EXPECT_THROW(pick_style_provider(1, 0, rng), std::invalid_argument);
  EXPECT_THROW(pick_style_provider(4, 4, rng), std::out_of_range);
}

TEST(Policy, Validate) {
  EXPECT_NO_THROW((AugmentationPolicy{0.0, 1.0}.validate()));
  EXPECT_THROW((AugmentationPolicy{1.1, 1.0}.validate()), std::invalid_argument);
  EXPECT_THROW((AugmentationPolicy{0.5, -0.1}.validate()), std::invalid_argument);
  EXPECT_THROW((AugmentationPolicy{std::nan(""), 1.0}.validate()), std::invalid_argument);
}

TEST_F(AugmentTest, ZeroProbabilityIsIdentity) {
  Rng rng(5);
  const auto b = batch(4, rng);
  const auto out = augment_batch(b, *model_, {0.0, 1.0}, rng);
  EXPECT_EQ(out.images, b.images);
  for (int i = 0; i < out.size(); ++i) {
    EXPECT_FALSE(out.stylized_mask[i]);
    EXPECT_FALSE(out.style_provider_index[i].has_value());
  }
}

TEST_F(AugmentTest, FullProbabilityStylizesEverySample) {
  Rng rng(6);
  const auto b = batch(4, rng);
  const auto out = augment_batch(b, *model_, {1.0, 1.0}, rng);
  for (int i = 0; i < out.size(); ++i) {
    EXPECT_TRUE(out.stylized_mask[i]);
    ASSERT_TRUE(out.style_provider_index[i].has_value());
    EXPECT_NE(*out.style_provider_index[i], i);
    // The sample matches a direct stylization against its recorded provider.
    const Tensor content = nn::slice_item(b.images, i).reshaped({1, 3, 16, 16});
    const Tensor style = nn::slice_item(b.images, *out.style_provider_index[i]).reshaped({1, 3, 16, 16});
    const Tensor direct = adain::stylize(*model_, content, style, 1.0);
    const Tensor got = nn::slice_item(out.images, i).reshaped({1, 3, 16, 16});
    for (std::size_t k = 0; k < got.size(); ++k) ASSERT_NEAR(got[k], direct[k], 1e-5);
  }
}

TEST_F(AugmentTest, RealizedRateAndLabelPreservation) {
  Rng rng(7);
  AugmentationTally tally;
  while (tally.report().samples < 10000) {
    const auto b = batch(8, rng);
    const auto out = augment_batch(b, *model_, {0.75, 1.0}, rng);
    ASSERT_EQ(out.labels, b.labels);
    ASSERT_EQ(out.domain_ids, b.domain_ids);
    ASSERT_EQ(out.image_ids, b.image_ids);
    ASSERT_EQ(out.images.shape(), b.images.shape());
    tally.add(out);
  }
  const auto& r = tally.report();
  EXPECT_GE(r.rate(), 0.737);
  EXPECT_LE(r.rate(), 0.763);
  expect_binomial(r.stylized, r.samples, 0.75, "stylized");
}

TEST_F(AugmentTest, CrossDomainFractionMatchesCombinatorics) {
  Rng rng(8);
  const int per_domain = 10, batch_size = 3 * per_domain;
  AugmentationTally tally;
  for (int k = 0; k < 150; ++k) tally.add(augment_batch(batch(per_domain, rng), *model_, {1.0, 1.0}, rng));
  const auto& r = tally.report();
  const double expected = static_cast<double>(batch_size - per_domain) / (batch_size - 1);
  expect_binomial(r.cross_domain, r.stylized, expected, "cross-domain");
  EXPECT_NEAR(r.cross_domain_fraction(), 2.0 / 3.0, 0.05);
}

TEST_F(AugmentTest, SameSeedSameOutput) {
  Rng data_rng(9);
  const auto b = batch(4, data_rng);
  Rng a(42), c(42);
  const auto x = augment_batch(b, *model_, {0.5, 0.7}, a);
  const auto y = augment_batch(b, *model_, {0.5, 0.7}, c);
  EXPECT_EQ(x.images, y.images);
  EXPECT_EQ(x.stylized_mask, y.stylized_mask);
  EXPECT_EQ(x.style_provider_index, y.style_provider_index);
}

TEST_F(AugmentTest, ZeroAlphaDecodesContentFeatures) {
  Rng rng(10);
  const auto b = batch(2, rng);
  const Tensor fc = nn::forward(model_->encoder, b.images, false).output;
  EXPECT_EQ(adain::decoder_input(*model_, b.images, b.images, 0.0), fc);
}

TEST_F(AugmentTest, Errors) {
  Rng rng(11);
  const auto b = batch(2, rng);
  adain::StyleTransferModel untrained = *model_;
  untrained.trained = false;
  EXPECT_THROW(augment_batch(b, untrained, {0.5, 1.0}, rng), adain::UntrainedModelError);
  const std::vector<data::LabeledImage> one{dataset_->domains[0][0]};
  EXPECT_THROW(augment_batch(data::make_batch(one), *model_, {0.5, 1.0}, rng), std::invalid_argument);
  EXPECT_THROW(augment_batch(b, *model_, {1.5, 1.0}, rng), std::invalid_argument);
}

TEST(Report, RatesAndErrors) {
  AugmentedBatch all;
  all.labels = {0, 1, 2};
  all.domain_ids = {0, 0, 1};
  all.stylized_mask = {true, true, true};
  all.style_provider_index = {1, 2, 0};
  AugmentedBatch none = all;
  none.stylized_mask = {false, false, false};
  none.style_provider_index = {std::nullopt, std::nullopt, std::nullopt};

  const std::vector<AugmentedBatch> full{all, all}, empty_rate{none};
  const auto r = augmentation_stats(full);
  EXPECT_EQ(r.rate(), 1.0);
  EXPECT_EQ(r.batches, 2u);
  EXPECT_NEAR(r.cross_domain_fraction(), 2.0 / 3.0, 1e-12);
  EXPECT_EQ(augmentation_stats(empty_rate).rate(), 0.0);
  EXPECT_EQ(augmentation_stats(empty_rate).cross_domain_fraction(), 0.0);
  EXPECT_THROW(augmentation_stats(std::span<const AugmentedBatch>{}), std::invalid_argument);

  const std::string text = format_report(r);
  EXPECT_NE(text.find("[augmentation_stats]"), std::string::npos);
  EXPECT_NE(text.find("[/augmentation_stats]"), std::string::npos);
}
