#pragma once

#include "shapeseg/shape/shape.hpp"

#include <span>
#include <vector>

namespace shapeseg::shape {

/// Isotropic similarity p -> scale * R(angle) * p + translation.
struct Similarity {
  double scale = 1.0;
  double angle = 0.0;
  Point translation{0.0, 0.0};

  Point apply(const Point& p) const { return scale * (rotation(angle) * p) + translation; }
  Shape apply(const Shape& s) const;
  Similarity inverse() const;
  /// (*this) after `first`.
  Similarity compose(const Similarity& first) const;
};

/// Least-squares similarity taking `from` onto `to` (closed form).
Similarity fit_similarity(const Shape& from, const Shape& to);

/// Sum of squared landmark distances between fit(from) and `to`.
double fitted_residual(const Shape& from, const Shape& to);

struct ProcrustesOptions {
  double tolerance = 1e-7;  // RMS change of the mean between iterations
  int max_iterations = 100;
};

struct ProcrustesResult {
  std::vector<Shape> aligned;          // shapes mapped into the mean frame
  std::vector<Similarity> transforms;  // mean frame -> original shape
  Shape mean;                          // centroid at origin, unit RMS radius
  std::vector<double> residual_trace;  // sum_n ||T_n(mean) - x_n||^2 per iteration
  int iterations = 0;
  bool converged = false;
};

/// Generalized Procrustes alignment with isotropic similarity transforms.
///
/// Each iteration fits T_n: mean -> x_n by least squares, then replaces the
/// mean by the scale^2-weighted average of T_n^-1(x_n), re-centered,
/// re-scaled to unit RMS radius and rotated onto the previous mean. The
/// weighted average is the exact minimizer for fixed T_n, so the residual
/// trace is non-increasing. Aligned shapes satisfy x.mean = |mean|^2 and
/// have zero rotational component against the mean (tangent-space form),
/// leaving at most 2M - 4 degrees of freedom for PCA.
ProcrustesResult procrustes_align(std::span<const Shape> shapes, const ProcrustesOptions& options = {});

/// Centers a shape and scales it to unit RMS radius.
Shape normalize_shape(const Shape& shape);

}  // namespace shapeseg::shape
