#pragma once

#include "kc/concepts/losses.hpp"
#include "kc/numcore/matrix.hpp"
#include "kc/numcore/rng.hpp"

#include <array>
#include <cstddef>
#include <filesystem>

namespace kc::bench {

inline constexpr std::size_t kGlyphShapes = 4;  // square, disk, cross, triangle
inline constexpr std::size_t kGlyphHues = 6;
inline constexpr std::size_t kGlyphChannels = 3;
inline constexpr std::size_t kGlyphConcepts = kGlyphShapes + kGlyphHues + 2;
inline constexpr double kGlyphMinWidth = 0.45;
inline constexpr double kGlyphMaxWidth = 0.9;
inline constexpr double kGlyphMinBrightness = 0.4;

struct GlyphFactors {
  std::size_t shape = 0;
  double width = 0.7;  // half-extent as a fraction of the half image
  std::size_t hue = 0;
  double brightness = 1.0;
};

/// RGB of hue h: red, yellow, green, cyan, blue, magenta.
std::array<double, 3> hue_rgb(std::size_t hue);

/// Flattened HxWx3 image in [0, 1], pixel-major with channels innermost.
/// Coverage is antialiased by 4x4 supersampling; pixels are coverage times
/// brightness times the hue color.
Vector render_glyph(const GlyphFactors& factors, std::size_t image_size);

struct GlyphDataset {
  Matrix images;           // n x (size * size * 3)
  Matrix factors;          // n x 4: shape, width, hue, brightness
  Vector class_labels;     // shape id
  std::size_t image_size = 0;

  Eigen::Index size() const { return images.rows(); }
  /// Binary target used by the label head and by selection: 1 for the
  /// solid shapes (square, disk), 0 for the thin ones (cross, triangle).
  Vector binary_labels() const;
  /// {0, 1} concept annotations: shape one-hot, hue one-hot, wide, bright.
  Matrix concept_labels() const;
  /// Images with binary labels, plus concept labels when requested.
  concepts::Batch batch(bool with_concepts) const;
  GlyphDataset subset(const std::vector<std::size_t>& rows) const;
};

/// Shape and hue uniform, width and brightness uniform on their ranges, pixel
/// noise uniform on [0, noise] then clipped to 1. Requires image_size >= 12.
GlyphDataset generate_glyph_dataset(std::size_t n, std::size_t image_size, RngStream& rng, double noise = 0.01);

/// images.kcmx, factors.kcmx, labels.kcmx (binary target, n x 1),
/// classes.kcmx (shape id, n x 1) and concepts.kcmx.
void save_glyph_dataset(const std::filesystem::path& dir, const GlyphDataset& data);
GlyphDataset load_glyph_dataset(const std::filesystem::path& dir);

/// Any dataset directory: images.kcmx and labels.kcmx, concepts.kcmx if present.
concepts::Batch load_batch(const std::filesystem::path& dir);

}  // namespace kc::bench
