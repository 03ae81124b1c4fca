#include "styleaug/data/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "styleaug/random.hpp"

namespace styleaug::data {

namespace {

constexpr int kSupersample = 4;

struct Range {
  double lo, hi;
  double draw(Rng& rng) const { return std::uniform_real_distribution<double>(lo, hi)(rng); }
};

enum class BackgroundTexture { Flat, Gradient, Blotch, Paper };
enum class FillTexture { Flat, Shading, Stripes };

/// How one domain renders a shape.
struct RenderStyle {
  Range fg_hue, fg_sat, fg_val;
  Range bg_hue, bg_sat, bg_val;
  bool grayscale = false;
  double fill_opacity = 1.0;  // 0 draws the outline only
  double outline_width = 0.0;
  Range outline_val{0.0, 0.0};
  BackgroundTexture bg_texture = BackgroundTexture::Flat;
  double bg_texture_amp = 0.0;
  FillTexture fill_texture = FillTexture::Flat;
  double fill_texture_amp = 0.0;
  double noise_sigma = 0.0;
};

const std::array<RenderStyle, 4>& builtin_styles() {
  static const std::array<RenderStyle, 4> styles = [] {
    std::array<RenderStyle, 4> s{};
    // photo: light shaded objects on dark, smoothly lit backgrounds
    s[0].fg_hue = {0.0, 1.0}, s[0].fg_sat = {0.25, 0.55}, s[0].fg_val = {0.6, 0.9};
    s[0].bg_hue = {0.0, 1.0}, s[0].bg_sat = {0.15, 0.4}, s[0].bg_val = {0.12, 0.35};
    s[0].bg_texture = BackgroundTexture::Gradient, s[0].bg_texture_amp = 0.15;
    s[0].fill_texture = FillTexture::Shading, s[0].fill_texture_amp = 0.2;
    s[0].noise_sigma = 0.03;
    // art: dark striped cool objects on warm blotchy canvas
    s[1].fg_hue = {0.52, 0.75}, s[1].fg_sat = {0.55, 0.9}, s[1].fg_val = {0.25, 0.5};
    s[1].bg_hue = {0.03, 0.15}, s[1].bg_sat = {0.4, 0.7}, s[1].bg_val = {0.6, 0.85};
    s[1].bg_texture = BackgroundTexture::Blotch, s[1].bg_texture_amp = 0.15;
    s[1].fill_texture = FillTexture::Stripes, s[1].fill_texture_amp = 0.12;
    s[1].noise_sigma = 0.02;
    // cartoon: saturated flat fills, heavy dark outline, pale flat background
    s[2].fg_hue = {0.0, 1.0}, s[2].fg_sat = {0.8, 1.0}, s[2].fg_val = {0.85, 1.0};
    s[2].bg_hue = {0.0, 1.0}, s[2].bg_sat = {0.1, 0.3}, s[2].bg_val = {0.88, 1.0};
    s[2].outline_width = 1.5, s[2].outline_val = {0.0, 0.1};
    // sketch: grey pencil outline on paper, no fill
    s[3].fg_hue = {0.0, 0.0}, s[3].fg_sat = {0.0, 0.0}, s[3].fg_val = {0.85, 0.95};
    s[3].bg_hue = {0.0, 0.0}, s[3].bg_sat = {0.0, 0.0}, s[3].bg_val = {0.85, 0.95};
    s[3].grayscale = true, s[3].fill_opacity = 0.0;
    s[3].outline_width = 1.0, s[3].outline_val = {0.1, 0.3};
    s[3].bg_texture = BackgroundTexture::Paper, s[3].bg_texture_amp = 0.04;
    s[3].noise_sigma = 0.03;
    return s;
  }();
  return styles;
}

RenderStyle style_for_domain(int domain) {
  RenderStyle s = builtin_styles()[domain % 4];
  if (domain >= 4) {
    // Extra domains reuse a base style with rotated hue ranges.
    const double shift = std::fmod(domain * std::numbers::phi, 1.0);
    auto rotate = [&](Range r) {
      if (r.hi - r.lo >= 1.0) return r;
      return Range{r.lo + shift, r.hi + shift};
    };
    s.fg_hue = rotate(s.fg_hue);
    s.bg_hue = rotate(s.bg_hue);
  }
  return s;
}

std::array<double, 3> hsv_to_rgb(double h, double s, double v) {
  h = std::fmod(h, 1.0);
  if (h < 0) h += 1.0;
  const double f6 = h * 6.0;
  const int sector = static_cast<int>(f6) % 6;
  const double f = f6 - std::floor(f6);
  const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
  switch (sector) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

bool inside_shape(int label, double dx, double dy, double r) {
  switch (label) {
    case 0:  // circle
      return dx * dx + dy * dy <= r * r;
    case 1:  // square
      return std::abs(dx) <= 0.8 * r && std::abs(dy) <= 0.8 * r;
    case 2: {  // upward triangle with apex (0,-r) and base at y = 0.8r
      if (dy > 0.8 * r || dy < -r) return false;
      const double half_width = r * (dy + r) / (1.8 * r);
      return std::abs(dx) <= half_width;
    }
    case 3:  // plus-shaped cross
      return (std::abs(dx) <= r / 3 && std::abs(dy) <= r) || (std::abs(dy) <= r / 3 && std::abs(dx) <= r);
    case 4: {  // ring
      const double d2 = dx * dx + dy * dy;
      return d2 <= r * r && d2 >= 0.3 * r * r;
    }
    case 5:  // diamond
      return std::abs(dx) + std::abs(dy) <= r;
    case 6:  // horizontal bar
      return std::abs(dx) <= r && std::abs(dy) <= 0.35 * r;
    default:
      throw std::out_of_range("no shape prototype for class " + std::to_string(label));
  }
}

std::vector<unsigned char> supersampled_inside(int label, const ShapeGeometry& g, int resolution) {
  const int hi = resolution * kSupersample;
  std::vector<unsigned char> inside(static_cast<std::size_t>(hi) * hi);
  for (int y = 0; y < hi; ++y)
    for (int x = 0; x < hi; ++x) {
      const double px = (x + 0.5) / kSupersample, py = (y + 0.5) / kSupersample;
      inside[static_cast<std::size_t>(y) * hi + x] = inside_shape(label, px - g.center_x, py - g.center_y, g.radius);
    }
  return inside;
}

std::vector<float> downsample(const std::vector<unsigned char>& hi_mask, int resolution) {
  const int hi = resolution * kSupersample;
  std::vector<float> out(static_cast<std::size_t>(resolution) * resolution, 0.0f);
  for (int y = 0; y < hi; ++y)
    for (int x = 0; x < hi; ++x)
      out[static_cast<std::size_t>(y / kSupersample) * resolution + x / kSupersample] += hi_mask[static_cast<std::size_t>(y) * hi + x];
  for (float& v : out) v /= kSupersample * kSupersample;
  return out;
}

/// Pixels inside the shape within `width` (image pixels) of its boundary.
std::vector<unsigned char> outline_band(const std::vector<unsigned char>& inside, int resolution, double width) {
  const int hi = resolution * kSupersample;
  const int radius = std::max(1, static_cast<int>(std::lround(width * kSupersample)));
  auto erode_axis = [&](const std::vector<unsigned char>& src, bool horizontal) {
    std::vector<unsigned char> dst(src.size());
    for (int y = 0; y < hi; ++y)
      for (int x = 0; x < hi; ++x) {
        unsigned char v = 1;
        for (int k = -radius; k <= radius && v; ++k) {
          const int xx = horizontal ? x + k : x, yy = horizontal ? y : y + k;
          if (xx < 0 || yy < 0 || xx >= hi || yy >= hi) v = 0;
          else v = src[static_cast<std::size_t>(yy) * hi + xx];
        }
        dst[static_cast<std::size_t>(y) * hi + x] = v;
      }
    return dst;
  };
  const auto eroded = erode_axis(erode_axis(inside, true), false);
  std::vector<unsigned char> band(inside.size());
  for (std::size_t i = 0; i < inside.size(); ++i) band[i] = inside[i] && !eroded[i];
  return band;
}

nn::Tensor render(const RenderStyle& style, int label, const ShapeGeometry& geom, int resolution, Rng& rng) {
  const auto inside = supersampled_inside(label, geom, resolution);
  const auto coverage = downsample(inside, resolution);
  std::vector<float> outline;
  if (style.outline_width > 0) outline = downsample(outline_band(inside, resolution, style.outline_width), resolution);

  auto fg = hsv_to_rgb(style.fg_hue.draw(rng), style.fg_sat.draw(rng), style.fg_val.draw(rng));
  auto bg = hsv_to_rgb(style.bg_hue.draw(rng), style.bg_sat.draw(rng), style.bg_val.draw(rng));
  const double line = style.outline_val.draw(rng);
  const double angle = std::uniform_real_distribution<double>(0, 2 * std::numbers::pi)(rng);
  const double stripe_period = std::uniform_real_distribution<double>(3.0, 5.0)(rng);
  std::array<std::array<double, 3>, 3> blotch{};  // (freq_x, freq_y, phase) per component
  for (auto& b : blotch)
    b = {std::uniform_real_distribution<double>(0.05, 0.25)(rng), std::uniform_real_distribution<double>(0.05, 0.25)(rng),
         std::uniform_real_distribution<double>(0, 2 * std::numbers::pi)(rng)};
  std::normal_distribution<double> noise(0.0, 1.0);

  const double ca = std::cos(angle), sa = std::sin(angle);
  nn::Tensor img({3, resolution, resolution});
  const std::size_t plane = static_cast<std::size_t>(resolution) * resolution;
  for (int y = 0; y < resolution; ++y)
    for (int x = 0; x < resolution; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * resolution + x;
      const double u = (x - resolution / 2.0) / resolution, v = (y - resolution / 2.0) / resolution;
      double bg_mod = 0.0;
      switch (style.bg_texture) {
        case BackgroundTexture::Flat: break;
        case BackgroundTexture::Gradient: bg_mod = style.bg_texture_amp * 2.0 * (u * ca + v * sa); break;
        case BackgroundTexture::Blotch:
          for (const auto& b : blotch) bg_mod += style.bg_texture_amp / 3.0 * std::sin(b[0] * x * 2 + b[1] * y * 2 + b[2]) * 2;
          break;
        case BackgroundTexture::Paper: bg_mod = style.bg_texture_amp * noise(rng); break;
      }
      double fg_mod = 0.0;
      switch (style.fill_texture) {
        case FillTexture::Flat: break;
        case FillTexture::Shading: fg_mod = -style.fill_texture_amp * 2.0 * ((x - geom.center_x) * ca + (y - geom.center_y) * sa) / (2 * geom.radius); break;
        case FillTexture::Stripes:
          fg_mod = style.fill_texture_amp * std::sin(2 * std::numbers::pi * (x * ca + y * sa) / stripe_period);
          break;
      }
      const double fill = coverage[p] * style.fill_opacity;
      const double edge = outline.empty() ? 0.0 : outline[p];
      const double grain = style.noise_sigma * noise(rng);
      for (int c = 0; c < 3; ++c) {
        double value = (1 - fill) * (bg[c] + bg_mod) + fill * (fg[c] + fg_mod);
        value = (1 - edge) * value + edge * line;
        value += style.grayscale ? grain : grain * (1.0 + 0.2 * c);
        img[c * plane + p] = static_cast<float>(std::clamp(value, 0.0, 1.0));
      }
    }
  return img;
}

}  // namespace

const std::vector<std::string>& synthetic_class_names() {
  static const std::vector<std::string> names{"circle", "square", "triangle", "cross", "ring", "diamond", "bar"};
  return names;
}

const std::vector<std::string>& synthetic_domain_names() {
  static const std::vector<std::string> names{"photo", "art", "cartoon", "sketch"};
  return names;
}

ShapeGeometry synthetic_geometry(const SyntheticSpec& spec, std::uint64_t seed, int domain, int label, int index) {
  Rng rng(derive_seed(seed, {0x6E0, static_cast<std::uint64_t>(domain), static_cast<std::uint64_t>(label),
                             static_cast<std::uint64_t>(index)}));
  const double res = spec.resolution;
  ShapeGeometry g;
  g.radius = std::uniform_real_distribution<double>(0.26 * res, 0.38 * res)(rng);
  const double slack = 0.5 * res - g.radius - 1.0;
  std::uniform_real_distribution<double> shift(-std::max(slack, 0.0), std::max(slack, 0.0));
  g.center_x = 0.5 * res + shift(rng);
  g.center_y = 0.5 * res + shift(rng);
  return g;
}

std::vector<float> render_shape_mask(int label, const ShapeGeometry& geometry, int resolution) {
  return downsample(supersampled_inside(label, geometry, resolution), resolution);
}

MultiDomainDataset generate_synthetic_domains(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.num_classes < 2) throw std::invalid_argument("synthetic dataset needs at least 2 classes");
  if (spec.num_domains < 2) throw std::invalid_argument("synthetic dataset needs at least 2 domains");
  if (spec.num_classes > static_cast<int>(synthetic_class_names().size()))
    throw std::invalid_argument("at most " + std::to_string(synthetic_class_names().size()) + " shape classes available");
  if (spec.images_per_class < 1) throw std::invalid_argument("images_per_class must be positive");
  if (spec.resolution < 8) throw std::invalid_argument("resolution must be at least 8");

  MultiDomainDataset ds;
  ds.class_names.assign(synthetic_class_names().begin(), synthetic_class_names().begin() + spec.num_classes);
  int id = 0;
  for (int d = 0; d < spec.num_domains; ++d) {
    ds.domain_names.push_back(d < 4 ? synthetic_domain_names()[d] : "domain" + std::to_string(d));
    const RenderStyle style = style_for_domain(d);
    std::vector<LabeledImage> images;
    images.reserve(static_cast<std::size_t>(spec.num_classes) * spec.images_per_class);
    for (int c = 0; c < spec.num_classes; ++c)
      for (int i = 0; i < spec.images_per_class; ++i) {
        Rng rng(derive_seed(seed, {0x5E1, static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(c),
                                   static_cast<std::uint64_t>(i)}));
        const ShapeGeometry g = synthetic_geometry(spec, seed, d, c, i);
        images.push_back({render(style, c, g, spec.resolution, rng), c, d, id++});
      }
    ds.domains.push_back(std::move(images));
  }
  ds.metadata = {{"generator", "synthetic-shapes"},
                 {"seed", std::to_string(seed)},
                 {"num_classes", std::to_string(spec.num_classes)},
                 {"num_domains", std::to_string(spec.num_domains)},
                 {"images_per_class", std::to_string(spec.images_per_class)},
                 {"resolution", std::to_string(spec.resolution)}};
  return ds;
}

}  // namespace styleaug::data
