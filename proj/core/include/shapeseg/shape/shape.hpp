#pragma once

#include <Eigen/Core>

#include <cmath>
#include <span>
#include <vector>

namespace shapeseg::shape {

using Point = Eigen::Vector2d;

/// Ordered landmark set stored as an interleaved 2M vector
/// (x0, y0, x1, y1, ...). Landmark i corresponds anatomically across all
/// shapes. A shape may consist of several closed contours ("sides"); side s
/// owns the contiguous index range [s*M/sides, (s+1)*M/sides).
class Shape {
 public:
  Shape() = default;
  explicit Shape(Eigen::VectorXd coords, int sides = 1);
  static Shape from_points(std::span<const Point> points, int sides = 1);

  Eigen::Index landmark_count() const { return coords_.size() / 2; }
  int sides() const { return sides_; }
  Eigen::Index side_size() const { return landmark_count() / sides_; }

  Point point(Eigen::Index i) const { return {coords_(2 * i), coords_(2 * i + 1)}; }
  void set_point(Eigen::Index i, const Point& p);
  std::vector<Point> points() const;
  std::vector<Point> side_points(int side) const;

  const Eigen::VectorXd& coords() const { return coords_; }
  Point centroid() const;

 private:
  Eigen::VectorXd coords_;
  int sides_ = 1;
};

/// Wraps an angle into (-pi, pi].
double wrap_angle(double theta);

inline Eigen::Matrix2d rotation(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

/// Anisotropic similarity transform X = diag(S) R(theta) x + T that maps the
/// aligned model frame into image space.
struct SpaceParams {
  Point translation{0.0, 0.0};
  double theta = 0.0;
  Point scale{1.0, 1.0};

  static SpaceParams identity() { return {}; }

  /// Throws DataError unless both scales are positive and finite.
  void validate() const;
  Eigen::Matrix2d linear() const { return scale.asDiagonal() * rotation(theta); }
  Point apply(const Point& p) const { return linear() * p + translation; }
  Point apply_inverse(const Point& p) const;
};

/// Applies the full transform to every landmark.
Shape apply_space(const SpaceParams& sp, const Shape& shape);
/// Inverse transform of every landmark (image space to model frame).
Shape apply_space_inverse(const SpaceParams& sp, const Shape& shape);
/// Applies only the linear part to an interleaved 2M displacement vector.
Eigen::VectorXd apply_linear(const SpaceParams& sp, const Eigen::VectorXd& displacement);

struct ShapeWeights {
  Eigen::VectorXd b;
};

/// Axis-aligned rectangle given by its center and (width, height).
struct Box {
  Point center{0.0, 0.0};
  Point size{0.0, 0.0};

  double aspect_ratio() const { return size.x() / size.y(); }
};

/// Tight axis-aligned bounding box of all landmarks.
Box bounding_box(const Shape& shape);

}  // namespace shapeseg::shape
