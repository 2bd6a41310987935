#include "kc/bench/glyphs.hpp"

#include "kc/numcore/error.hpp"
#include "kc/numcore/kcmx.hpp"

#include <algorithm>
#include <cmath>

namespace kc::bench {
namespace {

bool inside(std::size_t shape, double w, double u, double v) {
  switch (shape) {
    case 0:
      return std::max(std::abs(u), std::abs(v)) <= w;
    case 1:
      return u * u + v * v <= w * w;
    case 2: {
      const double arm = w / 3.0;
      return (std::abs(u) <= arm && std::abs(v) <= w) || (std::abs(v) <= arm && std::abs(u) <= w);
    }
    default:
      return v >= -w && v <= w && std::abs(u) <= 0.5 * (v + w);
  }
}

Matrix column(const Vector& v) {
  Matrix m(v.size(), 1);
  m.col(0) = v;
  return m;
}

}  // namespace

std::array<double, 3> hue_rgb(std::size_t hue) {
  static constexpr std::array<std::array<double, 3>, kGlyphHues> kColors{{
      {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 1, 1}, {0, 0, 1}, {1, 0, 1}}};
  if (hue >= kGlyphHues) throw Error(ErrorCode::InvalidArgument, "hue id out of range");
  return kColors[hue];
}

Vector render_glyph(const GlyphFactors& f, std::size_t image_size) {
  if (f.shape >= kGlyphShapes) throw Error(ErrorCode::InvalidArgument, "shape id out of range");
  const auto rgb = hue_rgb(f.hue);
  const std::size_t s = image_size;
  Vector img = Vector::Zero(static_cast<Eigen::Index>(s * s * kGlyphChannels));
  constexpr int kSub = 4;
  for (std::size_t r = 0; r < s; ++r) {
    for (std::size_t c = 0; c < s; ++c) {
      int hits = 0;
      for (int a = 0; a < kSub; ++a) {
        for (int b = 0; b < kSub; ++b) {
          const double v = 2.0 * (static_cast<double>(r) + (a + 0.5) / kSub) / static_cast<double>(s) - 1.0;
          const double u = 2.0 * (static_cast<double>(c) + (b + 0.5) / kSub) / static_cast<double>(s) - 1.0;
          hits += inside(f.shape, f.width, u, v) ? 1 : 0;
        }
      }
      const double cover = static_cast<double>(hits) / (kSub * kSub) * f.brightness;
      const auto base = static_cast<Eigen::Index>((r * s + c) * kGlyphChannels);
      for (std::size_t ch = 0; ch < kGlyphChannels; ++ch) img(base + static_cast<Eigen::Index>(ch)) = cover * rgb[ch];
    }
  }
  return img;
}

GlyphDataset generate_glyph_dataset(std::size_t n, std::size_t image_size, RngStream& rng, double noise) {
  if (image_size < 12) throw Error(ErrorCode::PreconditionViolated, "glyph images need at least 12 pixels per side");
  if (noise < 0.0 || noise > 0.01) throw Error(ErrorCode::InvalidArgument, "glyph pixel noise must lie in [0, 0.01]");
  GlyphDataset out;
  out.image_size = image_size;
  const auto d = static_cast<Eigen::Index>(image_size * image_size * kGlyphChannels);
  const auto rows = static_cast<Eigen::Index>(n);
  out.images.resize(rows, d);
  out.factors.resize(rows, 4);
  out.class_labels.resize(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    GlyphFactors f;
    f.shape = static_cast<std::size_t>(rng.uniform_index(kGlyphShapes));
    f.width = rng.uniform(kGlyphMinWidth, kGlyphMaxWidth);
    f.hue = static_cast<std::size_t>(rng.uniform_index(kGlyphHues));
    f.brightness = rng.uniform(kGlyphMinBrightness, 1.0);
    Vector img = render_glyph(f, image_size);
    if (noise > 0.0) {
      for (Eigen::Index k = 0; k < d; ++k) img(k) = std::min(1.0, img(k) + noise * rng.uniform());
    }
    out.images.row(i) = img.transpose();
    out.factors.row(i) << static_cast<double>(f.shape), f.width, static_cast<double>(f.hue), f.brightness;
    out.class_labels(i) = static_cast<double>(f.shape);
  }
  return out;
}

Vector GlyphDataset::binary_labels() const {
  Vector y(class_labels.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = class_labels(i) < 2.0 ? 1.0 : 0.0;
  return y;
}

Matrix GlyphDataset::concept_labels() const {
  Matrix c = Matrix::Zero(factors.rows(), static_cast<Eigen::Index>(kGlyphConcepts));
  const double width_mid = 0.5 * (kGlyphMinWidth + kGlyphMaxWidth);
  const double bright_mid = 0.5 * (kGlyphMinBrightness + 1.0);
  for (Eigen::Index i = 0; i < factors.rows(); ++i) {
    c(i, static_cast<Eigen::Index>(factors(i, 0))) = 1.0;
    c(i, static_cast<Eigen::Index>(kGlyphShapes) + static_cast<Eigen::Index>(factors(i, 2))) = 1.0;
    c(i, static_cast<Eigen::Index>(kGlyphShapes + kGlyphHues)) = factors(i, 1) > width_mid ? 1.0 : 0.0;
    c(i, static_cast<Eigen::Index>(kGlyphShapes + kGlyphHues + 1)) = factors(i, 3) > bright_mid ? 1.0 : 0.0;
  }
  return c;
}

concepts::Batch GlyphDataset::batch(bool with_concepts) const {
  concepts::Batch b;
  b.images = images;
  b.labels = binary_labels();
  if (with_concepts) b.concepts = concept_labels();
  return b;
}

GlyphDataset GlyphDataset::subset(const std::vector<std::size_t>& rows) const {
  GlyphDataset out;
  out.image_size = image_size;
  out.images = take_rows(images, rows);
  out.factors = take_rows(factors, rows);
  out.class_labels = take_rows(class_labels, rows);
  return out;
}

void save_glyph_dataset(const std::filesystem::path& dir, const GlyphDataset& data) {
  std::filesystem::create_directories(dir);
  save_kcmx(dir / "images.kcmx", data.images);
  save_kcmx(dir / "factors.kcmx", data.factors);
  save_kcmx(dir / "labels.kcmx", column(data.binary_labels()));
  save_kcmx(dir / "classes.kcmx", column(data.class_labels));
  save_kcmx(dir / "concepts.kcmx", data.concept_labels());
}

GlyphDataset load_glyph_dataset(const std::filesystem::path& dir) {
  GlyphDataset out;
  out.images = load_kcmx(dir / "images.kcmx");
  out.factors = load_kcmx(dir / "factors.kcmx");
  if (out.factors.rows() != out.images.rows() || out.factors.cols() != 4) {
    throw Error(ErrorCode::FormatError, "factors.kcmx does not match images.kcmx");
  }
  out.class_labels = out.factors.col(0);
  const double side = std::sqrt(static_cast<double>(out.images.cols()) / static_cast<double>(kGlyphChannels));
  out.image_size = static_cast<std::size_t>(std::lround(side));
  if (out.image_size * out.image_size * kGlyphChannels != static_cast<std::size_t>(out.images.cols())) {
    throw Error(ErrorCode::FormatError, "images.kcmx width is not a square RGB image");
  }
  return out;
}

concepts::Batch load_batch(const std::filesystem::path& dir) {
  concepts::Batch b;
  b.images = load_kcmx(dir / "images.kcmx");
  const Matrix labels = load_kcmx(dir / "labels.kcmx");
  if (labels.rows() != b.images.rows() || labels.cols() != 1) {
    throw Error(ErrorCode::FormatError, "labels.kcmx must be one column with a row per image");
  }
  b.labels = labels.col(0);
  if (std::filesystem::exists(dir / "concepts.kcmx")) {
    b.concepts = load_kcmx(dir / "concepts.kcmx");
    if (b.concepts->rows() != b.images.rows()) throw Error(ErrorCode::FormatError, "concepts.kcmx row count differs");
  }
  return b;
}

}  // namespace kc::bench
