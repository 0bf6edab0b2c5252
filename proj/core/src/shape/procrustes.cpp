#include "shapeseg/shape/procrustes.hpp"

#include "shapeseg/common/error.hpp"

#include <cmath>
#include <string>

namespace shapeseg::shape {
namespace {

double rms_radius(const Shape& s) {
  const Point c = s.centroid();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < s.landmark_count(); ++i) sum += (s.point(i) - c).squaredNorm();
  return std::sqrt(sum / static_cast<double>(s.landmark_count()));
}

double rms_change(const Shape& a, const Shape& b) {
  return std::sqrt((a.coords() - b.coords()).squaredNorm() / static_cast<double>(a.landmark_count()));
}

}  // namespace

Shape Similarity::apply(const Shape& s) const {
  Eigen::VectorXd out(s.coords().size());
  for (Eigen::Index i = 0; i < s.landmark_count(); ++i) out.segment<2>(2 * i) = apply(s.point(i));
  return Shape(std::move(out), s.sides());
}

Similarity Similarity::inverse() const {
  Similarity inv;
  inv.scale = 1.0 / scale;
  inv.angle = -angle;
  inv.translation = -(inv.scale * (rotation(inv.angle) * translation));
  return inv;
}

Similarity Similarity::compose(const Similarity& first) const {
  Similarity out;
  out.scale = scale * first.scale;
  out.angle = wrap_angle(angle + first.angle);
  out.translation = apply(first.translation);
  return out;
}

Similarity fit_similarity(const Shape& from, const Shape& to) {
  if (from.landmark_count() != to.landmark_count()) throw DataError("similarity fit needs equal landmark counts");
  const Point cf = from.centroid();
  const Point ct = to.centroid();
  double dot = 0.0, cross = 0.0, norm = 0.0;
  for (Eigen::Index i = 0; i < from.landmark_count(); ++i) {
    const Point a = from.point(i) - cf;
    const Point b = to.point(i) - ct;
    dot += a.dot(b);
    cross += a.x() * b.y() - a.y() * b.x();
    norm += a.squaredNorm();
  }
  if (norm <= 0.0) throw DataError("cannot fit a similarity to a degenerate shape");
  Similarity t;
  t.angle = std::atan2(cross, dot);
  t.scale = std::hypot(dot, cross) / norm;
  t.translation = ct - t.scale * (rotation(t.angle) * cf);
  return t;
}

double fitted_residual(const Shape& from, const Shape& to) {
  return (fit_similarity(from, to).apply(from).coords() - to.coords()).squaredNorm();
}

Shape normalize_shape(const Shape& shape) {
  const double r = rms_radius(shape);
  if (!(r > 0.0)) throw DataError("degenerate shape: all landmarks coincide");
  const Point c = shape.centroid();
  Eigen::VectorXd out(shape.coords().size());
  for (Eigen::Index i = 0; i < shape.landmark_count(); ++i) out.segment<2>(2 * i) = (shape.point(i) - c) / r;
  return Shape(std::move(out), shape.sides());
}

ProcrustesResult procrustes_align(std::span<const Shape> shapes, const ProcrustesOptions& options) {
  if (shapes.empty()) throw DataError("Procrustes alignment needs at least one shape");
  const Eigen::Index m = shapes.front().landmark_count();
  for (std::size_t n = 0; n < shapes.size(); ++n) {
    if (shapes[n].landmark_count() != m) {
      throw DataError("shape " + std::to_string(n) + " has " + std::to_string(shapes[n].landmark_count()) +
                      " landmarks, expected " + std::to_string(m));
    }
    const double scale = 1.0 + shapes[n].coords().cwiseAbs().maxCoeff();
    if (!(rms_radius(shapes[n]) > 1e-12 * scale)) {
      throw DataError("degenerate shape " + std::to_string(n) + ": all landmarks coincide");
    }
  }

  ProcrustesResult result;
  result.mean = normalize_shape(shapes.front());
  const std::size_t count = shapes.size();
  result.transforms.resize(count);

  auto fit_all = [&](const Shape& mean) {
    double residual = 0.0;
    for (std::size_t n = 0; n < count; ++n) {
      result.transforms[n] = fit_similarity(mean, shapes[n]);
      residual += (result.transforms[n].apply(mean).coords() - shapes[n].coords()).squaredNorm();
    }
    return residual;
  };

  result.residual_trace.push_back(fit_all(result.mean));
  for (int it = 0; it < options.max_iterations; ++it) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(2 * m);
    double weight = 0.0;
    for (std::size_t n = 0; n < count; ++n) {
      const Similarity& t = result.transforms[n];
      const double w = t.scale * t.scale;
      acc += w * t.inverse().apply(shapes[n]).coords();
      weight += w;
    }
    Shape next = normalize_shape(Shape(acc / weight, shapes.front().sides()));
    // Fix the rotational gauge against the previous mean.
    Similarity gauge = fit_similarity(next, result.mean);
    gauge.scale = 1.0;
    gauge.translation = Point::Zero();
    next = gauge.apply(next);

    const double change = rms_change(next, result.mean);
    result.mean = std::move(next);
    result.residual_trace.push_back(fit_all(result.mean));
    result.iterations = it + 1;
    if (change < options.tolerance) {
      result.converged = true;
      break;
    }
  }

  result.aligned.reserve(count);
  for (std::size_t n = 0; n < count; ++n) result.aligned.push_back(result.transforms[n].inverse().apply(shapes[n]));
  return result;
}

}  // namespace shapeseg::shape
