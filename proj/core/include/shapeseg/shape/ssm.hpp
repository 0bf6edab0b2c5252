#pragma once

#include "shapeseg/shape/shape.hpp"

#include <Eigen/Core>

#include <span>

namespace shapeseg::shape {

/// PCA point-distribution model: shape = mean + eigvecs * b.
struct ShapeModel {
  Eigen::VectorXd mean;     // 2M
  Eigen::MatrixXd eigvecs;  // 2M x K, orthonormal columns
  Eigen::VectorXd eigvals;  // K, descending, non-negative
  double energy_fraction = 0.95;
  int group_id = 0;
  int sides = 1;

  Eigen::Index modes() const { return eigvals.size(); }
  Eigen::Index landmark_count() const { return mean.size() / 2; }
  Shape mean_shape() const { return Shape(mean, sides); }

  /// Checks dimensions, ordering and orthonormality (1e-8); throws DataError.
  void validate() const;
};

/// Smallest K whose cumulative share of `eigvals` (sorted descending)
/// reaches `fraction`. Returns 0 when the total variance is zero.
Eigen::Index select_mode_count(const Eigen::VectorXd& eigvals, double fraction);

/// Builds the model from N >= 2 aligned shapes via SVD of the centered data
/// matrix. Eigenvector signs are fixed so the largest-magnitude component of
/// each column is positive.
ShapeModel build_ssm(std::span<const Shape> aligned, double energy_fraction, int group_id = 0);

/// Returns a copy restricted to the leading `k` modes.
ShapeModel truncate_modes(const ShapeModel& model, Eigen::Index k);

/// X = A_space(mean + P b). b may be shorter than K (missing weights are 0).
Shape synthesize_shape(const ShapeModel& model, const ShapeWeights& weights, const SpaceParams& sp);

/// b = P^T (A_space^-1 X - mean).
ShapeWeights project_shape(const ShapeModel& model, const Shape& shape, const SpaceParams& sp);

/// Clips each b_k into [-limit sqrt(lambda_k), +limit sqrt(lambda_k)].
ShapeWeights clamp_weights(const ShapeWeights& weights, const Eigen::VectorXd& eigvals, double limit = 3.0);

}  // namespace shapeseg::shape
