#include "shapeseg/data/image.hpp"

#include "shapeseg/common/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace shapeseg::data {
namespace {

double cubic_weight(double t) {
  constexpr double a = -0.5;
  t = std::abs(t);
  if (t < 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

}  // namespace

GrayImage GrayImage::filled(int width, int height, double value) {
  if (width <= 0 || height <= 0) throw DataError("image dimensions must be positive");
  GrayImage img;
  img.width = width;
  img.height = height;
  img.pixels.assign(static_cast<std::size_t>(width) * height, value);
  return img;
}

double GrayImage::clamped(int x, int y) const {
  return at(std::clamp(x, 0, width - 1), std::clamp(y, 0, height - 1));
}

void GrayImage::validate() const {
  if (width <= 0 || height <= 0) throw DataError("image dimensions must be positive");
  if (pixels.size() != static_cast<std::size_t>(width) * height) throw DataError("pixel buffer size mismatch");
  if (!(spacing.x() > 0.0 && spacing.y() > 0.0)) throw DataError("pixel spacing must be positive");
  for (double v : pixels) {
    if (!(v >= 0.0 && v <= 1.0)) throw DataError("pixel value " + std::to_string(v) + " outside [0, 1]");
  }
}

double sample_bilinear(const GrayImage& image, double x, double y) {
  const double fx = std::floor(x), fy = std::floor(y);
  const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
  const double tx = x - fx, ty = y - fy;
  const double top = (1.0 - tx) * image.clamped(x0, y0) + tx * image.clamped(x0 + 1, y0);
  const double bottom = (1.0 - tx) * image.clamped(x0, y0 + 1) + tx * image.clamped(x0 + 1, y0 + 1);
  return (1.0 - ty) * top + ty * bottom;
}

double sample_bicubic(const GrayImage& image, double x, double y) {
  const double fx = std::floor(x), fy = std::floor(y);
  const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
  const double tx = x - fx, ty = y - fy;
  double wx[4], wy[4];
  for (int i = 0; i < 4; ++i) {
    wx[i] = cubic_weight(tx - (i - 1));
    wy[i] = cubic_weight(ty - (i - 1));
  }
  double sum = 0.0;
  for (int j = 0; j < 4; ++j) {
    if (wy[j] == 0.0) continue;
    double row = 0.0;
    for (int i = 0; i < 4; ++i) {
      if (wx[i] != 0.0) row += wx[i] * image.clamped(x0 + i - 1, y0 + j - 1);
    }
    sum += wy[j] * row;
  }
  return sum;
}

GrayImage resize_image(const GrayImage& image, int width, int height) {
  if (width <= 0 || height <= 0) throw DataError("resize target must be positive");
  GrayImage out = GrayImage::filled(width, height, 0.0);
  out.bit_depth_source = image.bit_depth_source;
  const double sx = static_cast<double>(image.width) / width;
  const double sy = static_cast<double>(image.height) / height;
  out.spacing = {image.spacing.x() * sx, image.spacing.y() * sy};
  for (int y = 0; y < height; ++y) {
    const double src_y = (y + 0.5) * sy - 0.5;
    for (int x = 0; x < width; ++x) {
      const double src_x = (x + 0.5) * sx - 0.5;
      out.at(x, y) = std::clamp(sample_bicubic(image, src_x, src_y), 0.0, 1.0);
    }
  }
  return out;
}

GrayImage flip_horizontal(const GrayImage& image) {
  GrayImage out = image;
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) out.at(x, y) = image.at(image.width - 1 - x, y);
  }
  return out;
}

GrayImage flip_vertical(const GrayImage& image) {
  GrayImage out = image;
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) out.at(x, y) = image.at(x, image.height - 1 - y);
  }
  return out;
}

}  // namespace shapeseg::data
