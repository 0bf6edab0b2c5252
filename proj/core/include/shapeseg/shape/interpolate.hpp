#pragma once

#include "shapeseg/shape/shape.hpp"

#include <span>
#include <vector>

namespace shapeseg::shape {

/// Primary landmarks and the traced closed contour of one side.
/// The contour is closed: its last vertex repeats the first.
struct SideAnnotation {
  std::vector<Point> primaries;
  std::vector<Point> contour;
};

/// Places `count` landmarks on one side. Primaries are kept verbatim (each
/// must lie within 1 px of the contour, in contour order); the remaining
/// count - P landmarks are split evenly over the P contour segments between
/// consecutive primaries (earlier segments take any remainder) and spaced at
/// equal arc length inside each segment.
std::vector<Point> interpolate_side(const SideAnnotation& side, int count);

/// interpolate_side for every side, concatenated into one multi-side shape.
Shape interpolate_landmarks(std::span<const SideAnnotation> sides, int count_per_side);

/// Arc-length positions of `points` along the closed polyline, measured from
/// the first vertex. Each point is projected onto its nearest segment.
std::vector<double> arc_positions(std::span<const Point> contour, std::span<const Point> points);

}  // namespace shapeseg::shape
