#pragma once

#include <Eigen/Core>

#include <vector>

namespace shapeseg::data {

/// Row-major grayscale raster with intensities normalized into [0, 1].
/// Pixel (x, y) has its center at integer coordinates; samplers replicate
/// edge pixels outside the raster.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;
  Eigen::Vector2d spacing{1.0, 1.0};  // mm per pixel (x, y)
  int bit_depth_source = 12;

  static GrayImage filled(int width, int height, double value);

  double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  /// Edge-replicated access.
  double clamped(int x, int y) const;
  bool same_dims(const GrayImage& other) const { return width == other.width && height == other.height; }

  /// Throws DataError on bad dims, out-of-range pixels or bad spacing.
  void validate() const;
};

double sample_bilinear(const GrayImage& image, double x, double y);

/// Keys cubic convolution (a = -0.5); reproduces linear ramps exactly away
/// from the border.
double sample_bicubic(const GrayImage& image, double x, double y);

/// Bicubic resampling with pixel-center alignment; spacing is rescaled so
/// the physical extent is preserved. Results are clamped into [0, 1].
GrayImage resize_image(const GrayImage& image, int width, int height);

GrayImage flip_horizontal(const GrayImage& image);
GrayImage flip_vertical(const GrayImage& image);

}  // namespace shapeseg::data
