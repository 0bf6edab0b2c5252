#include "shapeseg/data/raster.hpp"

#include "shapeseg/common/error.hpp"

#include <algorithm>
#include <cmath>

namespace shapeseg::data {

using shape::Point;

Mask Mask::empty(int width, int height) {
  if (width <= 0 || height <= 0) throw DataError("mask dimensions must be positive");
  Mask m;
  m.width = width;
  m.height = height;
  m.values.assign(static_cast<std::size_t>(width) * height, 0);
  return m;
}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(values.begin(), values.end(), std::uint8_t{1}));
}

namespace {

double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

bool on_segment(const Point& p, const Point& a, const Point& b) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) && std::min(a.y(), b.y()) <= p.y() &&
         p.y() <= std::max(a.y(), b.y());
}

bool segments_touch(const Point& a, const Point& b, const Point& c, const Point& d) {
  const double d1 = cross(c, d, a), d2 = cross(c, d, b);
  const double d3 = cross(a, b, c), d4 = cross(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  if (d1 == 0 && on_segment(a, c, d)) return true;
  if (d2 == 0 && on_segment(b, c, d)) return true;
  if (d3 == 0 && on_segment(c, a, b)) return true;
  if (d4 == 0 && on_segment(d, a, b)) return true;
  return false;
}

double signed_area(std::span<const Point> poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point& p = poly[i];
    const Point& q = poly[(i + 1) % poly.size()];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

}  // namespace

bool polygon_self_intersects(std::span<const Point> poly) {
  const std::size_t n = poly.size();
  if (n < 4) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % n];
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // neighbours through the closing edge
      if (segments_touch(a, b, poly[j], poly[(j + 1) % n])) return true;
    }
  }
  return false;
}

Mask rasterize_polygon(std::span<const Point> poly, int width, int height, bool allow_self_intersection) {
  Mask mask = Mask::empty(width, height);
  for (const auto& p : poly) {
    if (!std::isfinite(p.x()) || !std::isfinite(p.y())) throw DataError("polygon has non-finite vertices");
  }
  if (poly.size() < 3) return mask;
  // A bowtie has zero signed area but still encloses pixels under even-odd.
  const bool crossing = polygon_self_intersects(poly);
  if (crossing && !allow_self_intersection) throw DataError("cannot rasterize a self-intersecting polygon");
  if (!crossing && signed_area(poly) == 0.0) return mask;

  double ymin = poly[0].y(), ymax = poly[0].y();
  for (const auto& p : poly) {
    ymin = std::min(ymin, p.y());
    ymax = std::max(ymax, p.y());
  }
  const int y0 = std::max(0, static_cast<int>(std::ceil(ymin)));
  const int y1 = std::min(height - 1, static_cast<int>(std::ceil(ymax)) - 1);
  std::vector<double> xs;
  for (int y = y0; y <= y1; ++y) {
    xs.clear();
    const double yc = y;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Point& a = poly[i];
      const Point& b = poly[(i + 1) % poly.size()];
      // Half-open in y so shared vertices are counted once.
      if ((a.y() <= yc && yc < b.y()) || (b.y() <= yc && yc < a.y())) {
        const double t = (yc - a.y()) / (b.y() - a.y());
        xs.push_back(a.x() + t * (b.x() - a.x()));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const int xa = std::max(0, static_cast<int>(std::ceil(xs[k])));
      const int xb = std::min(width, static_cast<int>(std::ceil(xs[k + 1])));
      for (int x = xa; x < xb; ++x) mask.set(x, y, true);
    }
  }
  return mask;
}

Mask rasterize_shape(const shape::Shape& shape, int width, int height, bool allow_self_intersection) {
  if (shape.landmark_count() == 0) throw DataError("cannot rasterize an empty shape");
  Mask out = Mask::empty(width, height);
  for (int s = 0; s < shape.sides(); ++s) {
    const auto pts = shape.side_points(s);
    const Mask m = rasterize_polygon(pts, width, height, allow_self_intersection);
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] |= m.values[i];
  }
  return out;
}

}  // namespace shapeseg::data
