#pragma once

#include "shapeseg/shape/shape.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace shapeseg::data {

/// Binary raster, row-major, one byte per pixel (0 or 1).
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;

  static Mask empty(int width, int height);
  bool at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v) { values[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
  std::size_t count() const;
  bool same_dims(const Mask& other) const { return width == other.width && height == other.height; }
};

/// True when two non-adjacent edges of the closed polygon touch or cross.
bool polygon_self_intersects(std::span<const shape::Point> polygon);

/// Even-odd scanline fill of one closed polygon. A pixel is set when its
/// center lies inside; centers exactly on a left edge count as inside and
/// on a right edge as outside, so abutting polygons never share pixels.
/// Throws DataError for self-intersecting input unless
/// allow_self_intersection is set, in which case the even-odd rule decides.
Mask rasterize_polygon(std::span<const shape::Point> polygon, int width, int height,
                       bool allow_self_intersection = false);

/// Union of the per-side polygon fills.
Mask rasterize_shape(const shape::Shape& shape, int width, int height, bool allow_self_intersection = false);

}  // namespace shapeseg::data
