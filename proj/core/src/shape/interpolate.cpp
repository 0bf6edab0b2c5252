#include "shapeseg/shape/interpolate.hpp"

#include "shapeseg/common/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace shapeseg::shape {
namespace {

struct Projection {
  double arc = 0.0;
  double distance = std::numeric_limits<double>::infinity();
};

std::vector<double> cumulative_lengths(std::span<const Point> contour) {
  std::vector<double> cum(contour.size(), 0.0);
  for (std::size_t i = 1; i < contour.size(); ++i) cum[i] = cum[i - 1] + (contour[i] - contour[i - 1]).norm();
  return cum;
}

Projection project_onto(std::span<const Point> contour, const std::vector<double>& cum, const Point& p) {
  Projection best;
  for (std::size_t i = 0; i + 1 < contour.size(); ++i) {
    const Point a = contour[i];
    const Point d = contour[i + 1] - a;
    const double len2 = d.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
    const double dist = (a + t * d - p).norm();
    if (dist < best.distance) {
      best.distance = dist;
      best.arc = cum[i] + t * std::sqrt(len2);
    }
  }
  return best;
}

Point point_at(std::span<const Point> contour, const std::vector<double>& cum, double arc) {
  const double total = cum.back();
  arc = std::fmod(arc, total);
  if (arc < 0.0) arc += total;
  const auto it = std::upper_bound(cum.begin(), cum.end(), arc);
  std::size_t i = it == cum.begin() ? 0 : static_cast<std::size_t>(it - cum.begin()) - 1;
  if (i + 1 >= contour.size()) i = contour.size() - 2;
  const double seg = cum[i + 1] - cum[i];
  const double t = seg > 0.0 ? (arc - cum[i]) / seg : 0.0;
  return contour[i] + t * (contour[i + 1] - contour[i]);
}

void check_closed(std::span<const Point> contour) {
  if (contour.size() < 4) throw DataError("contour needs at least three distinct vertices");
  const double scale = 1.0 + contour.front().cwiseAbs().maxCoeff();
  if ((contour.front() - contour.back()).norm() > 1e-9 * scale) {
    throw DataError("contour is open: first and last vertices differ");
  }
}

}  // namespace

std::vector<double> arc_positions(std::span<const Point> contour, std::span<const Point> points) {
  check_closed(contour);
  const auto cum = cumulative_lengths(contour);
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(project_onto(contour, cum, p).arc);
  return out;
}

std::vector<Point> interpolate_side(const SideAnnotation& side, int count) {
  const std::span<const Point> contour(side.contour);
  check_closed(contour);
  const auto p = static_cast<int>(side.primaries.size());
  if (p < 1) throw DataError("at least one primary landmark is required");
  if (count < p) throw DataError("landmark count is smaller than the number of primaries");
  const auto cum = cumulative_lengths(contour);
  const double total = cum.back();
  if (!(total > 0.0)) throw DataError("contour has zero length");

  std::vector<double> arcs;
  for (int i = 0; i < p; ++i) {
    const Projection proj = project_onto(contour, cum, side.primaries[static_cast<std::size_t>(i)]);
    if (proj.distance > 1.0) {
      throw DataError("primary landmark " + std::to_string(i) + " lies " + std::to_string(proj.distance) +
                      " px from the contour");
    }
    arcs.push_back(proj.arc);
  }
  // Forward arc gaps between consecutive primaries must wrap exactly once.
  std::vector<double> gaps(static_cast<std::size_t>(p));
  double sum = 0.0;
  for (int i = 0; i < p; ++i) {
    double g = arcs[static_cast<std::size_t>((i + 1) % p)] - arcs[static_cast<std::size_t>(i)];
    if (p == 1) g = total;
    if (g < 0.0) g += total;
    if (g < 1e-9 * total) throw DataError("primary landmarks " + std::to_string(i) + " and next coincide");
    gaps[static_cast<std::size_t>(i)] = g;
    sum += g;
  }
  if (std::abs(sum - total) > 1e-6 * total) throw DataError("primary landmarks are not in contour order");

  const int secondaries = count - p;
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < p; ++i) {
    const int n = secondaries / p + (i < secondaries % p ? 1 : 0);
    out.push_back(side.primaries[static_cast<std::size_t>(i)]);
    for (int j = 1; j <= n; ++j) {
      const double arc = arcs[static_cast<std::size_t>(i)] + gaps[static_cast<std::size_t>(i)] * j / (n + 1);
      out.push_back(point_at(contour, cum, arc));
    }
  }
  return out;
}

Shape interpolate_landmarks(std::span<const SideAnnotation> sides, int count_per_side) {
  if (sides.empty()) throw DataError("no sides to interpolate");
  std::vector<Point> all;
  for (const auto& side : sides) {
    auto pts = interpolate_side(side, count_per_side);
    all.insert(all.end(), pts.begin(), pts.end());
  }
  return Shape::from_points(all, static_cast<int>(sides.size()));
}

}  // namespace shapeseg::shape
