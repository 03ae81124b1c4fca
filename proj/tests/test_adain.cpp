#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "styleaug/adain/adain.hpp"
#include "styleaug/adain/style_model.hpp"
#include "styleaug/data/synthetic.hpp"
#include "styleaug/nn/gradcheck.hpp"
#include "styleaug/random.hpp"


namespace data = styleaug::data;
namespace nn = styleaug::nn;
using namespace styleaug::adain;
using nn::Tensor;

namespace {

template <typename T = float>
BasicTensor<T> random_features(const nn::Shape& shape, std::mt19937_64& rng, double scale = 1.0, double shift = 0.0) {
  std::normal_distribution<double> n(shift, scale);
  BasicTensor<T> t(shape);
  for (auto& v : t.storage()) v = static_cast<T>(n(rng));
  return t;
}

// Reverses the spatial order of every plane.
Tensor permute_planes(const Tensor& f) {
  Tensor out = f;
  const std::size_t n = static_cast<std::size_t>(f.dim(2)) * f.dim(3);
  for (std::size_t p = 0; p < f.size() / n; ++p) std::reverse(out.ptr() + p * n, out.ptr() + (p + 1) * n);
  return out;
}

std::vector<data::LabeledImage> tiny_images(int per_class, int resolution = 16) {
  data::SyntheticSpec spec;
  spec.images_per_class = per_class;
  spec.resolution = resolution;
  const auto ds = data::generate_synthetic_domains(spec, 3);
  std::vector<data::LabeledImage> all;
  for (const auto& d : ds.domains) all.insert(all.end(), d.begin(), d.end());
  return all;
}

StyleTrainingConfig tiny_config(int epochs = 4) {
  StyleTrainingConfig c;
  c.epochs = epochs;
  c.batch_size = 4;
  c.encoder_pretrain_iterations = 20;
  c.architecture.resolution = 16;
  c.architecture.widths = {4, 8};
  c.seed = 5;
  return c;
}

}  // namespace

TEST(ChannelStats, ConstantChannel) {
  const auto s = channel_stats(Tensor({1, 1, 3, 3}, 3.0f));
  EXPECT_FLOAT_EQ(s.mu[0], 3.0f);
  EXPECT_NEAR(s.sigma[0], std::sqrt(kDefaultEps), 1e-9);
}

TEST(ChannelStats, TwoByTwoExample) {
  const auto s = channel_stats(Tensor({1, 1, 2, 2}, std::vector<float>{1, 2, 3, 4}));
  EXPECT_FLOAT_EQ(s.mu[0], 2.5f);
  EXPECT_NEAR(s.sigma[0], std::sqrt(1.25 + 1e-5), 1e-7);
  EXPECT_NEAR(s.sigma[0], 1.1180, 1e-4);
}

TEST(ChannelStats, PopulationVarianceMatchesScalarLoop) {
  std::mt19937_64 rng(1);
  const Tensor f = random_features({2, 3, 4, 5}, rng);
  const auto s = channel_stats(f);
  for (int b = 0; b < 2; ++b)
    for (int c = 0; c < 3; ++c) {
      double sum = 0, sq = 0;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 5; ++j) sum += f.at(b, c, i, j);
      const double mean = sum / 20;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 5; ++j) sq += (f.at(b, c, i, j) - mean) * (f.at(b, c, i, j) - mean);
      EXPECT_NEAR(s.mu[b * 3 + c], mean, 1e-6);
      EXPECT_NEAR(s.sigma[b * 3 + c], std::sqrt(sq / 20 + kDefaultEps), 1e-6);
    }
}

TEST(ChannelStats, PermutationInvariant) {
  std::mt19937_64 rng(2);
  const Tensor f = random_features({2, 3, 4, 4}, rng);
  const auto a = channel_stats(f), b = channel_stats(permute_planes(f));
  for (std::size_t i = 0; i < a.mu.size(); ++i) {
    EXPECT_NEAR(a.mu[i], b.mu[i], 1e-6);
    EXPECT_NEAR(a.sigma[i], b.sigma[i], 1e-6);
  }
}

TEST(ChannelStats, Errors) {
  EXPECT_THROW(channel_stats(Tensor({1, 2, 0, 3})), nn::ShapeError);
  EXPECT_THROW(channel_stats(Tensor({2, 3})), nn::ShapeError);
}

TEST(Adain, ScalarExample) {
  const Tensor content({1, 1, 2, 2}, std::vector<float>{1, 2, 3, 4});
  // mean 1 and sqrt(var + eps) = 1
  const float d = static_cast<float>(std::sqrt(1.0 - kDefaultEps));
  const Tensor style({1, 1, 2, 2}, std::vector<float>{1 - d, 1 + d, 1 - d, 1 + d});
  const Tensor out = adain(content, style);
  const double scale = 1.0 / std::sqrt(1.25 + kDefaultEps);
  const std::vector<double> expected{-0.342, 0.553, 1.447, 2.342};
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(out[i], expected[i], 1e-3);
    EXPECT_NEAR(out[i], scale * (i + 1 - 2.5) + 1.0, 1e-6);
  }
}

TEST(Adain, SelfStyleIsIdentity) {
  std::mt19937_64 rng(3);
  const Tensor f = random_features({2, 4, 5, 5}, rng);
  const Tensor out = adain(f, f);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(out[i], f[i], 1e-5);
}

TEST(Adain, ConstantContentGivesStyleMean) {
  std::mt19937_64 rng(4);
  const Tensor style = random_features({1, 2, 3, 3}, rng, 2.0, 1.0);
  const Tensor out = adain(Tensor({1, 2, 4, 4}, 7.0f), style);
  const auto s = channel_stats(style);
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < 16; ++i) EXPECT_NEAR(out[c * 16 + i], s.mu[c], 1e-6);
}

TEST(Adain, StatisticTransferProperty) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> dim(2, 6);
  std::uniform_real_distribution<double> scale(0.5, 2.0), shift(-2.0, 2.0);
  for (int trial = 0; trial < 120; ++trial) {
    const int b = dim(rng) / 2, c = dim(rng);
    const Tensor fc = random_features({b, c, dim(rng) + 2, dim(rng) + 2}, rng, scale(rng), shift(rng));
    const Tensor fs = random_features({b, c, dim(rng) + 2, dim(rng) + 2}, rng, scale(rng), shift(rng));
    const auto got = channel_stats(adain(fc, fs));
    const auto want = channel_stats(fs);
    const auto src = channel_stats(fc);
    for (std::size_t i = 0; i < got.mu.size(); ++i) {
      // eps sits inside sigma, so the transferred sigma is off by about eps * sigma_s / (2 sigma_c^2).
      if (src.sigma[i] < 0.3) continue;
      EXPECT_NEAR(got.mu[i], want.mu[i], 1e-4);
      EXPECT_NEAR(got.sigma[i], want.sigma[i], 1e-4);
    }
  }
}

TEST(Adain, IdempotentOnStatistics) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor fc = random_features({2, 3, 6, 6}, rng, 1.5);
    const Tensor fs = random_features({2, 3, 4, 4}, rng, 1.2, 0.5);
    const Tensor once = adain(fc, fs);
    const Tensor twice = adain(once, fs);
    for (std::size_t i = 0; i < once.size(); ++i) EXPECT_NEAR(twice[i], once[i], 1e-4);
  }
}

TEST(Adain, PreservesContentShape) {
  std::mt19937_64 rng(7);
  const Tensor fc = random_features({2, 3, 6, 5}, rng);
  EXPECT_EQ(adain(fc, random_features({2, 3, 2, 9}, rng)).shape(), fc.shape());
}

TEST(Adain, Errors) {
  EXPECT_THROW(adain(Tensor({1, 2, 3, 3}), Tensor({1, 3, 3, 3})), nn::ShapeError);
  EXPECT_THROW(adain(Tensor({1, 2, 3, 3}), Tensor({1, 2, 9})), nn::ShapeError);
}

TEST(Interpolate, EndpointsAndMidpoint) {
  std::mt19937_64 rng(8);
  const Tensor a = random_features({1, 2, 3, 3}, rng), b = random_features({1, 2, 3, 3}, rng);
  EXPECT_EQ(interpolate_features(a, b, 0.0), a);
  EXPECT_EQ(interpolate_features(a, b, 1.0), b);
  const Tensor mid = interpolate_features(a, b, 0.5);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(mid[i], 0.5 * (a[i] + b[i]), 1e-6);
  EXPECT_THROW(interpolate_features(a, b, 1.5), std::invalid_argument);
  EXPECT_THROW(interpolate_features(a, b, -0.1), std::invalid_argument);
  EXPECT_THROW(interpolate_features(a, Tensor({1, 2, 3, 4}), 0.5), nn::ShapeError);
}

TEST(ContentLoss, Examples) {
  std::mt19937_64 rng(9);
  const Tensor a = random_features({2, 3, 4, 4}, rng), b = random_features({2, 3, 4, 4}, rng);
  EXPECT_EQ(content_loss(a, a).value, 0.0);
  Tensor shifted = a;
  for (float& v : shifted.storage()) v += 1.0f;
  EXPECT_NEAR(content_loss(shifted, a).value, 1.0, 1e-6);
  double sum = 0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (double(a[i]) - b[i]) * (double(a[i]) - b[i]);
  EXPECT_NEAR(content_loss(a, b).value, sum / a.size(), 1e-6);
  EXPECT_THROW(content_loss(a, Tensor({2, 3, 4, 5})), nn::ShapeError);
}

TEST(StyleLoss, Examples) {
  std::mt19937_64 rng(10);
  const std::vector<Tensor> taps{random_features({2, 3, 4, 4}, rng), random_features({2, 5, 2, 2}, rng)};
  EXPECT_EQ(style_loss<float>(taps, taps).value, 0.0);

  // Planes with exact (mu, sigma) once eps is included: mean m, alternating m +- d.
  const auto plane = [](double mu, double sigma) {
    const float d = static_cast<float>(std::sqrt(sigma * sigma - kDefaultEps));
    Tensor t({1, 3, 2, 2});
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(mu) + (i % 2 ? d : -d);
    return t;
  };
  const std::vector<Tensor> out{plane(1, 1)}, sty{plane(0, 2)};
  EXPECT_NEAR(style_loss<float>(out, sty).value, 2.0, 1e-5);
}

TEST(StyleLoss, PermutationInvariant) {
  std::mt19937_64 rng(11);
  const std::vector<Tensor> a{random_features({2, 3, 4, 4}, rng)}, b{random_features({2, 3, 4, 4}, rng)};
  const std::vector<Tensor> pa{permute_planes(a[0])}, pb{permute_planes(b[0])};
  EXPECT_NEAR(style_loss<float>(a, b).value, style_loss<float>(pa, b).value, 1e-6);
  EXPECT_NEAR(style_loss<float>(a, b).value, style_loss<float>(a, pb).value, 1e-6);
}

TEST(StyleLoss, Errors) {
  const std::vector<Tensor> one{Tensor({1, 2, 2, 2})}, two{Tensor({1, 2, 2, 2}), Tensor({1, 2, 2, 2})};
  EXPECT_THROW(style_loss<float>(one, two), nn::ShapeError);
  const std::vector<Tensor> other{Tensor({1, 3, 2, 2})};
  EXPECT_THROW(style_loss<float>(one, other), nn::ShapeError);
}

TEST(Gradients, LossesThroughAdainMatchFiniteDifferences) {
  std::mt19937_64 rng(12);
  using T64 = BasicTensor<double>;
  const T64 fc = random_features<double>({1, 2, 3, 3}, rng, 1.3);
  const T64 fs = random_features<double>({1, 2, 4, 4}, rng, 0.8, 0.4);
  const T64 target = random_features<double>({1, 2, 3, 3}, rng);
  const T64 style_ref = random_features<double>({1, 2, 3, 3}, rng, 1.5);

  // L(fc, fs) = content_loss(adain(fc, fs), target) + style_loss([adain(fc, fs)], [style_ref])
  const auto loss = [&](const T64& c, const T64& s) {
    const T64 y = adain(c, s);
    const std::vector<T64> out{y}, ref{style_ref};
    return content_loss(y, target).value + style_loss<double>(out, ref).value;
  };
  const T64 y = adain(fc, fs);
  const std::vector<T64> out{y}, ref{style_ref};
  T64 dy = content_loss(y, target).grad;
  const auto sl = style_loss<double>(out, ref);
  for (std::size_t i = 0; i < dy.size(); ++i) dy[i] += sl.grads[0][i];
  const auto g = adain_backward(fc, fs, dy);

  const T64 num_c = nn::numeric_gradient([&](const T64& c) { return loss(c, fs); }, fc, 1e-5);
  const T64 num_s = nn::numeric_gradient([&](const T64& s) { return loss(fc, s); }, fs, 1e-5);
  for (std::size_t i = 0; i < fc.size(); ++i) EXPECT_LE(nn::relative_error(g.content[i], num_c[i]), 1e-3) << i;
  for (std::size_t i = 0; i < fs.size(); ++i) EXPECT_LE(nn::relative_error(g.style[i], num_s[i]), 1e-3) << i;
}

TEST(Stylize, UntrainedModelThrows) {
  const auto model = make_style_model(tiny_config().architecture, 1);
  const Tensor img({1, 3, 16, 16}, 0.5f);
  EXPECT_THROW(stylize(model, img, img, 1.0), UntrainedModelError);
}

TEST(Stylize, ClampsAndKeepsShape) {
  auto model = make_style_model(tiny_config().architecture, 1);
  model.trained = true;
  // Large decoder weights push outputs well outside [0,1] before the clamp.
  for (auto& layer : model.decoder.params)
    for (auto& t : layer)
      for (float& v : t.storage()) v *= 20.0f;
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<float> u(0, 1);
  Tensor content({2, 3, 16, 16}), style({2, 3, 16, 16});
  for (float& v : content.storage()) v = u(rng);
  for (float& v : style.storage()) v = u(rng);
  const Tensor out = stylize(model, content, style, 0.7);
  EXPECT_EQ(out.shape(), content.shape());
  for (float v : out.storage()) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
  EXPECT_THROW(stylize(model, content, Tensor({1, 3, 16, 16}), 0.5), nn::ShapeError);
  EXPECT_THROW(stylize(model, content, style, 2.0), std::invalid_argument);
}

TEST(Stylize, DecoderInputIsLinearInAlpha) {
  const auto model = make_style_model(tiny_config().architecture, 2);
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<float> u(0, 1);
  Tensor content({2, 3, 16, 16}), style({2, 3, 16, 16});
  for (float& v : content.storage()) v = u(rng);
  for (float& v : style.storage()) v = u(rng);
  const Tensor d0 = decoder_input(model, content, style, 0.0);
  const Tensor d1 = decoder_input(model, content, style, 1.0);
  for (double alpha : {0.1, 0.25, 0.5, 0.9}) {
    const Tensor da = decoder_input(model, content, style, alpha);
    for (std::size_t i = 0; i < da.size(); ++i) EXPECT_NEAR(da[i], (1 - alpha) * d0[i] + alpha * d1[i], 1e-5);
  }
}

TEST(StyleTraining, InitialLossFinitePositiveAndDecreasing) {
  const auto images = tiny_images(2);
  const auto r = train_style_model(images, 7, tiny_config(4));
  ASSERT_EQ(r.curve.size(), 4u);
  EXPECT_TRUE(std::isfinite(r.curve.front().total));
  EXPECT_GT(r.curve.front().total, 0.0);
  EXPECT_LT(r.curve.back().total, r.curve.front().total);
  EXPECT_TRUE(r.model.trained);
}

TEST(StyleTraining, EncoderStaysFrozen) {
  const auto images = tiny_images(1);
  auto config = tiny_config(2);
  config.encoder_pretrain_iterations = 0;
  const auto fresh = make_style_model(config.architecture, config.seed);
  const auto r = train_style_model(images, 7, config);
  EXPECT_EQ(nn::parameter_hash(r.model.encoder.params), nn::parameter_hash(fresh.encoder.params));
  EXPECT_NE(nn::parameter_hash(r.model.decoder.params), nn::parameter_hash(fresh.decoder.params));
}

TEST(StyleTraining, SelfStyledSingleImageReconstructs) {
  const auto one = tiny_images(1).front();
  const std::vector<data::LabeledImage> images{one, one};
  auto config = tiny_config(60);
  config.batch_size = 2;
  const auto r = train_style_model(images, 7, config);
  const auto third = r.curve.size() / 3;
  double early = 0, late = 0, early_lc = 0, late_lc = 0;
  for (std::size_t i = 0; i < third; ++i) {
    early += r.curve[i].total;
    late += r.curve[r.curve.size() - 1 - i].total;
    early_lc += r.curve[i].content;
    late_lc += r.curve[r.curve.size() - 1 - i].content;
  }
  EXPECT_LT(late, early);
  EXPECT_LT(late_lc, early_lc);

  // Same image as content and style: alpha = 1 should land on the alpha = 0 reconstruction.
  const Tensor img = one.pixels.reshaped({1, 3, 16, 16});
  const Tensor rec = stylize(r.model, img, img, 0.0);
  const Tensor sty = stylize(r.model, img, img, 1.0);
  for (std::size_t i = 0; i < rec.size(); ++i) EXPECT_NEAR(sty[i], rec[i], 1e-3);
}

TEST(StyleTraining, ZeroStyleWeightReconstructsBetter) {
  const auto images = tiny_images(2);
  auto config = tiny_config(6);
  config.lambda_style = 0.0;
  const auto plain = train_style_model(images, 7, config);
  config.lambda_style = 10.0;
  const auto styled = train_style_model(images, 7, config);
  EXPECT_LT(plain.curve.back().content, styled.curve.back().content);
}

TEST(StyleTraining, Errors) {
  const std::vector<data::LabeledImage> single{tiny_images(1).front()};
  EXPECT_THROW(train_style_model(single, 7, tiny_config()), std::invalid_argument);
  EXPECT_THROW(train_style_model(tiny_images(1), 7, tiny_config(0)), std::invalid_argument);
}

TEST(StyleCheckpoint, RoundTrip) {
  auto model = make_style_model(tiny_config().architecture, 3);
  model.trained = true;
  model.lambda_style = 2.5;
  const auto back = style_model_from_checkpoint(nn::decode_checkpoint(nn::encode_checkpoint(to_checkpoint(model))));
  EXPECT_EQ(back.encoder.layers, model.encoder.layers);
  EXPECT_EQ(back.encoder.tap_points, model.encoder.tap_points);
  EXPECT_EQ(nn::parameter_hash(back.decoder.params), nn::parameter_hash(model.decoder.params));
  EXPECT_EQ(back.lambda_style, 2.5);
  EXPECT_EQ(back.eps, model.eps);
  EXPECT_TRUE(back.trained);
  nn::Checkpoint wrong;
  wrong.metadata["kind"] = "classifier";
  EXPECT_THROW(style_model_from_checkpoint(wrong), nn::CheckpointError);
}
