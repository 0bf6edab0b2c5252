#include "shapeseg/shape/ssm.hpp"

#include "shapeseg/common/error.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

namespace shapeseg::shape {

void ShapeModel::validate() const {
  if (mean.size() == 0 || mean.size() % 2 != 0) throw DataError("shape model mean must have even, nonzero length");
  if (sides < 1 || landmark_count() % sides != 0) throw DataError("shape model side count does not divide M");
  if (eigvecs.rows() != mean.size() || eigvecs.cols() != eigvals.size()) {
    throw DataError("shape model eigenvector matrix has wrong shape");
  }
  if (!(energy_fraction > 0.0 && energy_fraction <= 1.0)) throw DataError("energy fraction must lie in (0, 1]");
  for (Eigen::Index k = 0; k < eigvals.size(); ++k) {
    if (!(eigvals(k) >= 0.0)) throw DataError("shape model eigenvalues must be non-negative");
    if (k > 0 && eigvals(k) > eigvals(k - 1)) throw DataError("shape model eigenvalues must be descending");
  }
  const Eigen::MatrixXd gram = eigvecs.transpose() * eigvecs;
  if (gram.size() > 0 &&
      (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() > 1e-8) {
    throw DataError("shape model eigenvectors are not orthonormal");
  }
}

Eigen::Index select_mode_count(const Eigen::VectorXd& eigvals, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw DataError("energy fraction must lie in (0, 1]");
  const double total = eigvals.sum();
  if (!(total > 0.0)) return 0;
  // Relative slack absorbs rounding in the cumulative sum when fraction == 1.
  const double target = fraction * total * (1.0 - 1e-12);
  double cumulative = 0.0;
  for (Eigen::Index k = 0; k < eigvals.size(); ++k) {
    cumulative += eigvals(k);
    if (cumulative >= target) return k + 1;
  }
  return eigvals.size();
}

ShapeModel build_ssm(std::span<const Shape> aligned, double energy_fraction, int group_id) {
  if (aligned.size() < 2) throw DataError("shape model needs at least two shapes");
  const Eigen::Index dim = aligned.front().coords().size();
  const auto n = static_cast<Eigen::Index>(aligned.size());
  Eigen::MatrixXd data(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (aligned[static_cast<std::size_t>(i)].coords().size() != dim) {
      throw DataError("shape " + std::to_string(i) + " has a different landmark count");
    }
    data.row(i) = aligned[static_cast<std::size_t>(i)].coords().transpose();
  }
  ShapeModel model;
  model.energy_fraction = energy_fraction;
  model.group_id = group_id;
  model.sides = aligned.front().sides();
  model.mean = data.colwise().mean().transpose();
  data.rowwise() -= model.mean.transpose();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(data, Eigen::ComputeThinV);
  const Eigen::VectorXd all = svd.singularValues().array().square() / static_cast<double>(n - 1);
  const Eigen::Index k = select_mode_count(all, energy_fraction);
  model.eigvals = all.head(k);
  model.eigvecs = svd.matrixV().leftCols(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    Eigen::Index arg = 0;
    model.eigvecs.col(c).cwiseAbs().maxCoeff(&arg);
    if (model.eigvecs(arg, c) < 0.0) model.eigvecs.col(c) *= -1.0;
  }
  return model;
}

ShapeModel truncate_modes(const ShapeModel& model, Eigen::Index k) {
  if (k < 0 || k > model.modes()) throw DataError("cannot truncate to " + std::to_string(k) + " modes");
  ShapeModel out = model;
  out.eigvals = model.eigvals.head(k);
  out.eigvecs = model.eigvecs.leftCols(k);
  return out;
}

Shape synthesize_shape(const ShapeModel& model, const ShapeWeights& weights, const SpaceParams& sp) {
  const Eigen::Index len = weights.b.size();
  if (len > model.modes()) {
    throw DataError("weight vector has " + std::to_string(len) + " entries but the model has " +
                    std::to_string(model.modes()) + " modes");
  }
  Eigen::VectorXd x = model.mean;
  if (len > 0) x += model.eigvecs.leftCols(len) * weights.b;
  return apply_space(sp, Shape(std::move(x), model.sides));
}

ShapeWeights project_shape(const ShapeModel& model, const Shape& shape, const SpaceParams& sp) {
  if (shape.coords().size() != model.mean.size()) throw DataError("shape and model landmark counts differ");
  if (!(sp.scale.x() > 0.0) || !(sp.scale.y() > 0.0)) throw NumericError("singular space transform (scale <= 0)");
  const Shape local = apply_space_inverse(sp, shape);
  return {model.eigvecs.transpose() * (local.coords() - model.mean)};
}

ShapeWeights clamp_weights(const ShapeWeights& weights, const Eigen::VectorXd& eigvals, double limit) {
  if (weights.b.size() > eigvals.size()) throw DataError("more weights than eigenvalues");
  ShapeWeights out = weights;
  for (Eigen::Index k = 0; k < out.b.size(); ++k) {
    const double bound = limit * std::sqrt(std::max(0.0, eigvals(k)));
    out.b(k) = std::clamp(out.b(k), -bound, bound);
  }
  return out;
}

}  // namespace shapeseg::shape
