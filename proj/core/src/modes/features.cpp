#include "shapeseg/modes/features.hpp"

#include "shapeseg/common/error.hpp"

namespace shapeseg::modes {

Eigen::VectorXd extract_shape_patch_vector(const data::GrayImage& image, const shape::Shape& shape, int q) {
  if (q < 1 || q % 2 == 0) throw DataError("patch side q must be a positive odd number");
  const Eigen::Index m = shape.landmark_count();
  if (m == 0) throw DataError("cannot extract patches from an empty shape");
  const int h = q / 2;
  Eigen::VectorXd out(m * q * q);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const shape::Point p = shape.point(i);
    for (int dy = -h; dy <= h; ++dy) {
      for (int dx = -h; dx <= h; ++dx) out(k++) = data::sample_bilinear(image, p.x() + dx, p.y() + dy);
    }
  }
  return out;
}

}  // namespace shapeseg::modes
