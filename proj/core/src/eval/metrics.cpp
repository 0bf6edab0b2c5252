#include "shapeseg/eval/metrics.hpp"

#include "shapeseg/common/error.hpp"
#include "shapeseg/common/log.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace shapeseg::eval {

using shape::Point;

namespace {

struct Counts {
  std::size_t a = 0, b = 0, both = 0;
};

Counts count_overlap(const data::Mask& gt, const data::Mask& seg) {
  if (!gt.same_dims(seg)) throw DataError("masks have different dimensions");
  Counts c;
  for (std::size_t i = 0; i < gt.values.size(); ++i) {
    const bool x = gt.values[i] != 0, y = seg.values[i] != 0;
    c.a += x;
    c.b += y;
    c.both += x && y;
  }
  return c;
}

double segment_distance(const Point& p, const Point& a, const Point& b) {
  const Point ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

// Squared distance transform along one axis (Felzenszwalb-Huttenlocher)
// with sample spacing w.
void edt_1d(const std::vector<double>& f, std::vector<double>& d, double w) {
  const int n = static_cast<int>(f.size());
  std::vector<int> v(static_cast<std::size_t>(n));
  std::vector<double> z(static_cast<std::size_t>(n) + 1);
  const double inf = std::numeric_limits<double>::infinity();
  const double w2 = w * w;
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[static_cast<std::size_t>(q)] == inf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -inf;
      z[1] = inf;
      continue;
    }
    double s;
    for (;;) {
      const int r = v[static_cast<std::size_t>(k)];
      s = ((f[static_cast<std::size_t>(q)] + w2 * q * q) - (f[static_cast<std::size_t>(r)] + w2 * r * r)) /
          (2.0 * w2 * (q - r));
      if (s <= z[static_cast<std::size_t>(k)] && k > 0) {
        --k;
      } else {
        break;
      }
    }
    if (s <= z[static_cast<std::size_t>(k)]) {  // k == 0: replace the only parabola
      v[0] = q;
      z[0] = -inf;
      z[1] = inf;
      continue;
    }
    ++k;
    v[static_cast<std::size_t>(k)] = q;
    z[static_cast<std::size_t>(k)] = s;
    z[static_cast<std::size_t>(k) + 1] = inf;
  }
  for (int q = 0; q < n; ++q) {
    if (k < 0) {
      d[static_cast<std::size_t>(q)] = inf;
      continue;
    }
    int j = 0;
    while (z[static_cast<std::size_t>(j) + 1] < q) ++j;
    const int r = v[static_cast<std::size_t>(j)];
    d[static_cast<std::size_t>(q)] = w2 * (q - r) * (q - r) + f[static_cast<std::size_t>(r)];
  }
}

// Squared physical distance from every pixel to the nearest listed pixel.
std::vector<double> squared_distance_map(int width, int height, const std::vector<Point>& sites,
                                         const Eigen::Vector2d& spacing) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> grid(static_cast<std::size_t>(width) * height, inf);
  for (const auto& p : sites) {
    grid[static_cast<std::size_t>(p.y()) * width + static_cast<std::size_t>(p.x())] = 0.0;
  }
  std::vector<double> f(static_cast<std::size_t>(std::max(width, height))), d(f.size());
  f.resize(static_cast<std::size_t>(height));
  d.resize(static_cast<std::size_t>(height));
  for (int x = 0; x < width; ++x) {
    for (int y = 0; y < height; ++y) f[static_cast<std::size_t>(y)] = grid[static_cast<std::size_t>(y) * width + x];
    edt_1d(f, d, spacing.y());
    for (int y = 0; y < height; ++y) grid[static_cast<std::size_t>(y) * width + x] = d[static_cast<std::size_t>(y)];
  }
  f.resize(static_cast<std::size_t>(width));
  d.resize(static_cast<std::size_t>(width));
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) f[static_cast<std::size_t>(x)] = grid[static_cast<std::size_t>(y) * width + x];
    edt_1d(f, d, spacing.x());
    for (int x = 0; x < width; ++x) grid[static_cast<std::size_t>(y) * width + x] = d[static_cast<std::size_t>(x)];
  }
  return grid;
}

}  // namespace

double dsc(const data::Mask& gt, const data::Mask& seg) {
  const Counts c = count_overlap(gt, seg);
  if (c.a + c.b == 0) {
    log::warn("DSC of two empty masks is defined as 1");
    return 1.0;
  }
  return 2.0 * static_cast<double>(c.both) / static_cast<double>(c.a + c.b);
}

double jaccard(const data::Mask& gt, const data::Mask& seg) {
  const Counts c = count_overlap(gt, seg);
  const std::size_t uni = c.a + c.b - c.both;
  if (uni == 0) {
    log::warn("Jaccard index of two empty masks is defined as 1");
    return 1.0;
  }
  return static_cast<double>(c.both) / static_cast<double>(uni);
}

Contour contour_from_shape(const shape::Shape& shape) {
  Contour c;
  for (int s = 0; s < shape.sides(); ++s) c.polylines.push_back(shape.side_points(s));
  return c;
}

std::vector<Point> resample_contour(const Contour& contour, int density) {
  if (density < 1) throw DataError("contour density must be at least 1");
  std::vector<Point> out;
  for (const auto& poly : contour.polylines) {
    const std::size_t n = poly.size();
    if (n == 1) out.push_back(poly.front());
    if (n < 2) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const Point& a = poly[i];
      const Point& b = poly[(i + 1) % n];
      for (int j = 0; j < density; ++j) out.push_back(a + (static_cast<double>(j) / density) * (b - a));
    }
  }
  return out;
}

double point_contour_distance(const Point& p, const Contour& contour, const Eigen::Vector2d& spacing) {
  const Point ps = p.cwiseProduct(spacing);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& poly : contour.polylines) {
    const std::size_t n = poly.size();
    if (n == 1) best = std::min(best, (poly.front().cwiseProduct(spacing) - ps).norm());
    for (std::size_t i = 0; n > 1 && i < n; ++i) {
      best = std::min(best, segment_distance(ps, poly[i].cwiseProduct(spacing), poly[(i + 1) % n].cwiseProduct(spacing)));
    }
  }
  return best;
}

double acd(const Contour& gt, const Contour& seg, const Eigen::Vector2d& spacing, int density) {
  const auto gp = resample_contour(gt, density);
  const auto sp = resample_contour(seg, density);
  if (gp.empty() || sp.empty()) throw DataError("ACD needs two non-empty contours");
  double to_gt = 0.0, to_seg = 0.0;
  for (const auto& p : sp) to_gt += point_contour_distance(p, gt, spacing);
  for (const auto& p : gp) to_seg += point_contour_distance(p, seg, spacing);
  return 0.5 * (to_gt / static_cast<double>(sp.size()) + to_seg / static_cast<double>(gp.size()));
}

std::vector<Point> mask_boundary(const data::Mask& mask) {
  std::vector<Point> out;
  auto outside = [&](int x, int y) { return x < 0 || y < 0 || x >= mask.width || y >= mask.height || !mask.at(x, y); };
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.at(x, y)) continue;
      if (outside(x - 1, y) || outside(x + 1, y) || outside(x, y - 1) || outside(x, y + 1)) out.emplace_back(x, y);
    }
  }
  return out;
}

double acd_masks(const data::Mask& gt, const data::Mask& seg, const Eigen::Vector2d& spacing) {
  if (!gt.same_dims(seg)) throw DataError("masks have different dimensions");
  const auto gb = mask_boundary(gt);
  const auto sb = mask_boundary(seg);
  if (gb.empty() || sb.empty()) throw DataError("ACD needs two non-empty contours");
  const auto to_gt = squared_distance_map(gt.width, gt.height, gb, spacing);
  const auto to_seg = squared_distance_map(gt.width, gt.height, sb, spacing);
  double a = 0.0, b = 0.0;
  for (const auto& p : sb) a += std::sqrt(to_gt[static_cast<std::size_t>(p.y()) * gt.width + static_cast<std::size_t>(p.x())]);
  for (const auto& p : gb) b += std::sqrt(to_seg[static_cast<std::size_t>(p.y()) * gt.width + static_cast<std::size_t>(p.x())]);
  return 0.5 * (a / static_cast<double>(sb.size()) + b / static_cast<double>(gb.size()));
}

double pearson_r(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DataError("correlation needs equal-length samples");
  if (a.size() < 2) throw DataError("correlation needs at least two pairs");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) throw DataError("correlation is undefined for zero variance");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

}  // namespace shapeseg::eval
