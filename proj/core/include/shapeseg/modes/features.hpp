#pragma once

#include "shapeseg/data/image.hpp"
#include "shapeseg/shape/shape.hpp"

#include <Eigen/Core>

namespace shapeseg::modes {

/// q x q bilinear patches centered on every landmark, concatenated in
/// landmark storage order (side 0 from its first landmark, then side 1),
/// each patch row-major. Length M * q^2. q must be odd.
Eigen::VectorXd extract_shape_patch_vector(const data::GrayImage& image, const shape::Shape& shape, int q);

}  // namespace shapeseg::modes
