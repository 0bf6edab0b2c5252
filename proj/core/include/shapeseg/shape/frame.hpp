#pragma once

#include "shapeseg/shape/procrustes.hpp"
#include "shapeseg/shape/shape.hpp"
#include "shapeseg/shape/ssm.hpp"

#include <span>
#include <vector>

namespace shapeseg::shape {

/// A_space that places `mean` (rotated by theta) exactly inside `box`:
/// with y = R(theta) mean, bounding-box center c and extents (w, h),
/// S = box.size / (w, h) and T = box.center - diag(S) c.
/// Throws DataError for a degenerate box or mean.
SpaceParams space_from_box(const Box& box, double theta, const Shape& mean);

/// GPA rotation angles (mean frame -> shape), shifted to zero circular mean.
std::vector<double> procrustes_orientations(const ProcrustesResult& gpa);

struct FrameModel {
  ShapeModel model;
  std::vector<SpaceParams> spaces;   // per shape, box-derived A_space
  std::vector<Shape> frame_shapes;   // A_n^-1 X_n
};

/// Builds a PCA model in the box-calibrated frame used at detection time.
///
/// The GPA mean seeds the frame, rotated so that theta = 0 is upright on
/// average. Then, for `iterations` rounds, every shape is mapped back with
/// space_from_box(bbox(X_n), theta_n, mean) and the mean is re-estimated.
/// An empty `thetas` uses procrustes_orientations.
FrameModel build_box_frame_model(std::span<const Shape> shapes, std::span<const double> thetas,
                                 double energy_fraction, int group_id, int iterations = 5);

}  // namespace shapeseg::shape
