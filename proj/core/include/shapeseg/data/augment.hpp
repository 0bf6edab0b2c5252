#pragma once

#include "shapeseg/common/rng.hpp"
#include "shapeseg/data/image.hpp"
#include "shapeseg/shape/shape.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

namespace shapeseg::data {

/// Top-J principal components of training images, computed on copies
/// resampled to side x side pixels.
struct IntensityBasis {
  int side = 64;
  Eigen::VectorXd mean;        // side*side
  Eigen::MatrixXd components;  // side*side x J, orthonormal columns
  Eigen::VectorXd eigvals;     // J, descending

  Eigen::Index size() const { return eigvals.size(); }
};

/// Throws DataError when J exceeds the number of nonzero-variance
/// components the images can provide (at most N - 1).
IntensityBasis fit_intensity_basis(std::span<const GrayImage> images, int components, int side = 64);

/// One alpha per basis component, each drawn from N(0, sigma).
std::vector<double> draw_alphas(Rng& rng, Eigen::Index count, double sigma = 0.1);

/// f + sum_j p_j * (alpha_j * lambda_j). The low-resolution offset field is
/// resampled bicubically onto the image grid (exact when the dims agree);
/// the result is clamped into [0, 1].
GrayImage perturb_intensity(const GrayImage& image, const IntensityBasis& basis, std::span<const double> alphas);

/// Mirrors landmarks across the vertical axis of an image of this width.
/// With swap_sides the side blocks are exchanged, so side s of the result
/// is the mirror of side (sides-1-s) of the input; this keeps landmark
/// correspondence for bilaterally symmetric annotations.
shape::Shape flip_shape_horizontal(const shape::Shape& shape, int width, bool swap_sides = true);
shape::Shape flip_shape_vertical(const shape::Shape& shape, int height);

struct AugmentConfig {
  bool horizontal_flip = true;
  bool vertical_flip = true;  // only used where correspondence is not needed
  int intensity_copies = 1;   // perturbed copies per (possibly flipped) image
  int intensity_components = 8;
  int intensity_side = 64;
  double alpha_sigma = 0.1;
  std::uint64_t seed = 0;
};

/// Training image with the geometry that survives augmentation.
struct AugmentedImage {
  GrayImage image;
  shape::Shape landmarks;
  double theta = 0.0;
  int source = 0;  // index of the original sample
  bool hflip = false;
  bool vflip = false;
};

/// Reflected and intensity-perturbed copies of the inputs, originals first.
/// Intensity copies draw one alpha vector per output image from a stream
/// seeded by (cfg.seed, source index, variant), so results do not depend on
/// how the inputs are batched. A reflection negates theta.
std::vector<AugmentedImage> augment_images(std::span<const AugmentedImage> originals, const IntensityBasis* basis,
                                           const AugmentConfig& cfg, bool allow_vertical);

/// Indices retained after random undersampling of the majority class to a
/// 1:1 ratio (in ascending order). Labels must be 0 or 1.
std::vector<std::size_t> balance_classes(std::span<const int> labels, std::uint64_t seed);

}  // namespace shapeseg::data
