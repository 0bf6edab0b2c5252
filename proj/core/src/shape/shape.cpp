#include "shapeseg/shape/shape.hpp"

#include "shapeseg/common/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace shapeseg::shape {

Shape::Shape(Eigen::VectorXd coords, int sides) : coords_(std::move(coords)), sides_(sides) {
  if (coords_.size() % 2 != 0) throw DataError("shape coordinate vector must have even length");
  if (sides_ < 1) throw DataError("shape must have at least one side");
  if (landmark_count() % sides_ != 0) {
    throw DataError("landmark count " + std::to_string(landmark_count()) + " is not divisible by side count " +
                    std::to_string(sides_));
  }
  if (!coords_.allFinite()) throw DataError("shape has non-finite coordinates");
}

Shape Shape::from_points(std::span<const Point> points, int sides) {
  Eigen::VectorXd c(2 * static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    c(2 * i) = points[i].x();
    c(2 * i + 1) = points[i].y();
  }
  return Shape(std::move(c), sides);
}

void Shape::set_point(Eigen::Index i, const Point& p) {
  if (!p.allFinite()) throw DataError("shape has non-finite coordinates");
  coords_(2 * i) = p.x();
  coords_(2 * i + 1) = p.y();
}

std::vector<Point> Shape::points() const {
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(landmark_count()));
  for (Eigen::Index i = 0; i < landmark_count(); ++i) out.push_back(point(i));
  return out;
}

std::vector<Point> Shape::side_points(int side) const {
  const Eigen::Index n = side_size();
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = side * n; i < (side + 1) * n; ++i) out.push_back(point(i));
  return out;
}

Point Shape::centroid() const {
  Point c(0.0, 0.0);
  for (Eigen::Index i = 0; i < landmark_count(); ++i) c += point(i);
  return c / static_cast<double>(landmark_count());
}

double wrap_angle(double theta) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double t = std::fmod(theta, two_pi);
  if (t <= -std::numbers::pi) t += two_pi;
  if (t > std::numbers::pi) t -= two_pi;
  return t;
}

void SpaceParams::validate() const {
  if (!(scale.x() > 0.0) || !(scale.y() > 0.0) || !scale.allFinite()) {
    throw DataError("space parameters need strictly positive scale");
  }
  if (!translation.allFinite() || !std::isfinite(theta)) throw DataError("space parameters are not finite");
}

Point SpaceParams::apply_inverse(const Point& p) const {
  const Point d = p - translation;
  return rotation(-theta) * Point(d.x() / scale.x(), d.y() / scale.y());
}

Shape apply_space(const SpaceParams& sp, const Shape& shape) {
  const Eigen::Matrix2d a = sp.linear();
  Eigen::VectorXd out(shape.coords().size());
  for (Eigen::Index i = 0; i < shape.landmark_count(); ++i) {
    out.segment<2>(2 * i) = a * shape.point(i) + sp.translation;
  }
  return Shape(std::move(out), shape.sides());
}

Shape apply_space_inverse(const SpaceParams& sp, const Shape& shape) {
  sp.validate();
  Eigen::VectorXd out(shape.coords().size());
  for (Eigen::Index i = 0; i < shape.landmark_count(); ++i) {
    out.segment<2>(2 * i) = sp.apply_inverse(shape.point(i));
  }
  return Shape(std::move(out), shape.sides());
}

Eigen::VectorXd apply_linear(const SpaceParams& sp, const Eigen::VectorXd& displacement) {
  const Eigen::Matrix2d a = sp.linear();
  Eigen::VectorXd out(displacement.size());
  for (Eigen::Index i = 0; i + 1 < displacement.size(); i += 2) {
    out.segment<2>(i) = a * displacement.segment<2>(i);
  }
  return out;
}

Box bounding_box(const Shape& shape) {
  if (shape.landmark_count() == 0) throw DataError("bounding box of an empty shape");
  Point lo = shape.point(0), hi = shape.point(0);
  for (Eigen::Index i = 1; i < shape.landmark_count(); ++i) {
    lo = lo.cwiseMin(shape.point(i));
    hi = hi.cwiseMax(shape.point(i));
  }
  return {(lo + hi) / 2.0, hi - lo};
}

}  // namespace shapeseg::shape
