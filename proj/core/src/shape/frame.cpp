#include "shapeseg/shape/frame.hpp"

#include "shapeseg/common/error.hpp"

#include <cmath>

namespace shapeseg::shape {

SpaceParams space_from_box(const Box& box, double theta, const Shape& mean) {
  if (!(box.size.x() > 0.0 && box.size.y() > 0.0)) throw DataError("box extents must be positive");
  if (mean.landmark_count() == 0) throw DataError("mean shape is empty");
  SpaceParams rot;
  rot.theta = theta;
  const Box yb = bounding_box(apply_space(rot, mean));
  if (!(yb.size.x() > 0.0 && yb.size.y() > 0.0)) throw DataError("mean shape has a degenerate bounding box");
  SpaceParams sp;
  sp.theta = wrap_angle(theta);
  sp.scale = box.size.cwiseQuotient(yb.size);
  sp.translation = box.center - sp.scale.cwiseProduct(yb.center);
  return sp;
}

std::vector<double> procrustes_orientations(const ProcrustesResult& gpa) {
  double s = 0.0, c = 0.0;
  for (const auto& t : gpa.transforms) {
    s += std::sin(t.angle);
    c += std::cos(t.angle);
  }
  const double center = std::atan2(s, c);
  std::vector<double> out;
  out.reserve(gpa.transforms.size());
  for (const auto& t : gpa.transforms) out.push_back(wrap_angle(t.angle - center));
  return out;
}

FrameModel build_box_frame_model(std::span<const Shape> shapes, std::span<const double> thetas,
                                 double energy_fraction, int group_id, int iterations) {
  if (shapes.size() < 2) throw DataError("a group model needs at least two shapes");
  if (!thetas.empty() && thetas.size() != shapes.size()) throw DataError("one orientation per shape is required");
  const ProcrustesResult gpa = procrustes_align(shapes);
  std::vector<double> theta(thetas.begin(), thetas.end());
  if (theta.empty()) theta = procrustes_orientations(gpa);

  double s = 0.0, c = 0.0;
  for (std::size_t n = 0; n < shapes.size(); ++n) {
    const double d = gpa.transforms[n].angle - theta[n];
    s += std::sin(d);
    c += std::cos(d);
  }
  SpaceParams upright;
  upright.theta = std::atan2(s, c);
  Shape mean = apply_space(upright, gpa.mean);

  FrameModel out;
  out.spaces.resize(shapes.size());
  out.frame_shapes.resize(shapes.size());
  for (int it = 0; it < std::max(1, iterations); ++it) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(mean.coords().size());
    for (std::size_t n = 0; n < shapes.size(); ++n) {
      out.spaces[n] = space_from_box(bounding_box(shapes[n]), theta[n], mean);
      out.frame_shapes[n] = apply_space_inverse(out.spaces[n], shapes[n]);
      acc += out.frame_shapes[n].coords();
    }
    mean = Shape(acc / static_cast<double>(shapes.size()), shapes.front().sides());
  }
  out.model = build_ssm(out.frame_shapes, energy_fraction, group_id);
  return out;
}

}  // namespace shapeseg::shape
