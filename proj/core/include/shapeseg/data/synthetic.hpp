#pragma once

#include "shapeseg/data/image.hpp"
#include "shapeseg/shape/io.hpp"
#include "shapeseg/shape/shape.hpp"
#include "shapeseg/shape/ssm.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace shapeseg::data {

/// Two-lobed base contour in model units: lobe centers at (+-offset, 0),
/// half-width `half_width`, half-height `half_height`; `taper` widens the
/// lower part of each lobe.
struct LobeFamily {
  double half_width = 0.22;
  double half_height = 0.5;
  double offset = 0.27;
  double taper = 0.2;
};

struct SyntheticSpec {
  int count = 100;
  int width = 256;
  int height = 256;
  int landmarks_per_side = 16;
  std::array<LobeFamily, 2> groups{LobeFamily{0.22, 0.5, 0.29, 0.2}, LobeFamily{0.3, 0.45, 0.35, 0.2}};
  double group1_fraction = 0.5;
  /// RMS landmark displacement (model units) of each generating mode; the
  /// eigenvalue of mode j is (rms_j^2 * M). Must be descending.
  std::vector<double> mode_rms{0.036, 0.03, 0.024, 0.019, 0.014, 0.008};
  double scale_min = 0.39;   // pixels per model unit, as a fraction of width
  double scale_max = 0.51;
  double anisotropy = 0.03;  // Sx = s(1+e), Sy = s(1-e), |e| <= anisotropy
  double theta_max = 0.12;   // radians
  double translation_jitter = 0.047;  // fraction of width/height
  double margin = 6.0;                // pixels kept free at the border
  double foreground = 0.62;
  double background = 0.26;
  double mediastinum = 0.44;  // fill between the lobes on rows crossing both
  double texture = 0.05;
  double blur_sigma = 0.8;
  double noise_sigma = 0.02;
  double spacing = 1.36;  // mm per pixel
  int bit_depth = 12;
  std::uint64_t seed = 0;
  int max_attempts = 200;

  /// Throws DataError for an inconsistent spec.
  void validate() const;
};

/// Generating PCA model of one group: mean = base contour, orthonormal
/// modes from low-order normal perturbations, eigvals from mode_rms.
shape::ShapeModel synthetic_group_model(const SyntheticSpec& spec, int group);

struct SyntheticTruth {
  int group = 0;
  shape::SpaceParams space;    // A_space used to synthesize the landmarks
  Eigen::VectorXd weights;     // b in the group model
  shape::Box box;              // bounding box of the landmarks
};

struct SyntheticSample {
  GrayImage image;
  shape::Shape landmarks;
  SyntheticTruth truth;
};

/// Draws sample `index`; the result depends only on (spec, index).
/// Throws DataError when no feasible draw is found within max_attempts.
SyntheticSample generate_synthetic_sample(const SyntheticSpec& spec, int index);

std::vector<SyntheticSample> generate_synthetic_dataset(const SyntheticSpec& spec, int jobs = 1);

/// Renders a filled multi-side shape the way the generator does; exposed
/// for tests and benchmarks.
GrayImage render_shape_image(const SyntheticSpec& spec, const shape::Shape& shape, std::uint64_t seed);

/// Writes images/, landmarks/, truth/, the two generating models and
/// manifest.json under `dir`; returns the manifest path.
std::filesystem::path write_synthetic_dataset(const std::filesystem::path& dir, const SyntheticSpec& spec,
                                              int jobs = 1);

nlohmann::json synthetic_spec_to_json(const SyntheticSpec& spec);
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& doc, SyntheticSpec defaults = {});

}  // namespace shapeseg::data
