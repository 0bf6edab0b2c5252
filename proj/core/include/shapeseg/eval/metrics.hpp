#pragma once

#include "shapeseg/data/raster.hpp"
#include "shapeseg/shape/shape.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace shapeseg::eval {

/// 2|A n B| / (|A| + |B|). Two empty masks score 1 with a warning.
double dsc(const data::Mask& gt, const data::Mask& seg);
/// |A n B| / |A u B|. Two empty masks score 1 with a warning.
double jaccard(const data::Mask& gt, const data::Mask& seg);

/// Closed polylines making up one contour (one per side).
struct Contour {
  std::vector<std::vector<shape::Point>> polylines;
};

Contour contour_from_shape(const shape::Shape& shape);

/// Each closed polyline with every edge split into `density` equal parts.
std::vector<shape::Point> resample_contour(const Contour& contour, int density);

/// Distance from p to the nearest edge of any closed polyline, measured
/// after scaling coordinates by `spacing`.
double point_contour_distance(const shape::Point& p, const Contour& contour, const Eigen::Vector2d& spacing);

/// 1/2 (mean_{p in SEG} d(p, GT) + mean_{p in GT} d(p, SEG)) in physical
/// units. Points are the contours resampled at `density` points per edge;
/// distances are to the other polyline itself.
double acd(const Contour& gt, const Contour& seg, const Eigen::Vector2d& spacing, int density = 4);

/// Foreground pixels with a 4-neighbour outside the foreground (the image
/// border counts as outside), as pixel centers.
std::vector<shape::Point> mask_boundary(const data::Mask& mask);

/// ACD between mask boundaries (pixel centers), via exact Euclidean
/// distance transforms.
double acd_masks(const data::Mask& gt, const data::Mask& seg, const Eigen::Vector2d& spacing);

/// Sample Pearson correlation; throws DataError for zero variance or
/// fewer than two pairs.
double pearson_r(std::span<const double> a, std::span<const double> b);

}  // namespace shapeseg::eval
