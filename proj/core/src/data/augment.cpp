#include "shapeseg/data/augment.hpp"

#include "shapeseg/common/error.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <string>

namespace shapeseg::data {

IntensityBasis fit_intensity_basis(std::span<const GrayImage> images, int components, int side) {
  if (side <= 0) throw DataError("intensity basis side must be positive");
  if (components < 0) throw DataError("intensity component count must be non-negative");
  const auto n = static_cast<Eigen::Index>(images.size());
  if (components > std::max<Eigen::Index>(0, n - 1)) {
    throw DataError("requested " + std::to_string(components) + " intensity components but " + std::to_string(n) +
                    " images provide at most " + std::to_string(std::max<Eigen::Index>(0, n - 1)));
  }
  const Eigen::Index dim = static_cast<Eigen::Index>(side) * side;
  IntensityBasis basis;
  basis.side = side;
  basis.mean = Eigen::VectorXd::Zero(dim);
  basis.components.resize(dim, components);
  basis.eigvals.resize(components);
  if (components == 0) {
    for (const auto& img : images) {
      const GrayImage small = resize_image(img, side, side);
      basis.mean += Eigen::Map<const Eigen::VectorXd>(small.pixels.data(), dim);
    }
    if (n > 0) basis.mean /= static_cast<double>(n);
    return basis;
  }
  Eigen::MatrixXd data(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    const GrayImage small = resize_image(images[static_cast<std::size_t>(i)], side, side);
    data.row(i) = Eigen::Map<const Eigen::VectorXd>(small.pixels.data(), dim).transpose();
  }
  basis.mean = data.colwise().mean().transpose();
  data.rowwise() -= basis.mean.transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(data, Eigen::ComputeThinV);
  const Eigen::VectorXd all = svd.singularValues().array().square() / static_cast<double>(n - 1);
  for (Eigen::Index j = 0; j < components; ++j) {
    if (!(all(j) > 0.0)) throw DataError("training images do not provide " + std::to_string(components) +
                                         " intensity components with nonzero variance");
  }
  basis.eigvals = all.head(components);
  basis.components = svd.matrixV().leftCols(components);
  for (Eigen::Index c = 0; c < components; ++c) {
    Eigen::Index arg = 0;
    basis.components.col(c).cwiseAbs().maxCoeff(&arg);
    if (basis.components(arg, c) < 0.0) basis.components.col(c) *= -1.0;
  }
  return basis;
}

std::vector<double> draw_alphas(Rng& rng, Eigen::Index count, double sigma) {
  std::vector<double> alphas(static_cast<std::size_t>(count));
  for (auto& a : alphas) a = rng.normal(0.0, sigma);
  return alphas;
}

GrayImage perturb_intensity(const GrayImage& image, const IntensityBasis& basis, std::span<const double> alphas) {
  if (static_cast<Eigen::Index>(alphas.size()) != basis.size()) {
    throw DataError("alpha count does not match the intensity basis");
  }
  const Eigen::Index dim = static_cast<Eigen::Index>(basis.side) * basis.side;
  Eigen::VectorXd offset = Eigen::VectorXd::Zero(dim);
  for (Eigen::Index j = 0; j < basis.size(); ++j) {
    offset += basis.components.col(j) * (alphas[static_cast<std::size_t>(j)] * basis.eigvals(j));
  }
  GrayImage field;
  field.width = basis.side;
  field.height = basis.side;
  field.pixels.assign(offset.data(), offset.data() + dim);

  GrayImage out = image;
  const bool same = image.width == basis.side && image.height == basis.side;
  const double sx = static_cast<double>(basis.side) / image.width;
  const double sy = static_cast<double>(basis.side) / image.height;
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const double d =
          same ? field.at(x, y) : sample_bicubic(field, (x + 0.5) * sx - 0.5, (y + 0.5) * sy - 0.5);
      out.at(x, y) = std::clamp(image.at(x, y) + d, 0.0, 1.0);
    }
  }
  return out;
}

shape::Shape flip_shape_horizontal(const shape::Shape& shape, int width, bool swap_sides) {
  const Eigen::Index m = shape.landmark_count();
  const Eigen::Index per = shape.side_size();
  const int sides = shape.sides();
  Eigen::VectorXd out(2 * m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index side = i / per;
    const Eigen::Index local = i % per;
    const Eigen::Index target = swap_sides ? (sides - 1 - side) * per + local : i;
    out(2 * target) = (width - 1) - shape.coords()(2 * i);
    out(2 * target + 1) = shape.coords()(2 * i + 1);
  }
  return shape::Shape(out, sides);
}

shape::Shape flip_shape_vertical(const shape::Shape& shape, int height) {
  Eigen::VectorXd out = shape.coords();
  for (Eigen::Index i = 0; i < shape.landmark_count(); ++i) out(2 * i + 1) = (height - 1) - out(2 * i + 1);
  return shape::Shape(out, shape.sides());
}

std::vector<AugmentedImage> augment_images(std::span<const AugmentedImage> originals, const IntensityBasis* basis,
                                           const AugmentConfig& cfg, bool allow_vertical) {
  std::vector<AugmentedImage> geometric;
  for (const auto& o : originals) geometric.push_back(o);
  for (const auto& o : originals) {
    if (cfg.horizontal_flip) {
      AugmentedImage f = o;
      f.image = flip_horizontal(o.image);
      f.landmarks = flip_shape_horizontal(o.landmarks, o.image.width);
      f.theta = -o.theta;
      f.hflip = !o.hflip;
      geometric.push_back(std::move(f));
    }
    if (allow_vertical && cfg.vertical_flip) {
      AugmentedImage f = o;
      f.image = flip_vertical(o.image);
      f.landmarks = flip_shape_vertical(o.landmarks, o.image.height);
      f.theta = -o.theta;
      f.vflip = !o.vflip;
      geometric.push_back(std::move(f));
    }
  }
  std::vector<AugmentedImage> out = geometric;
  if (basis == nullptr || basis->size() == 0 || cfg.intensity_copies <= 0) return out;
  for (const auto& g : geometric) {
    const std::uint64_t variant = (g.hflip ? 1u : 0u) | (g.vflip ? 2u : 0u);
    for (int c = 0; c < cfg.intensity_copies; ++c) {
      Rng rng(mix_seed(mix_seed(mix_seed(cfg.seed, static_cast<std::uint64_t>(g.source)), variant),
                       static_cast<std::uint64_t>(c)));
      const auto alphas = draw_alphas(rng, basis->size(), cfg.alpha_sigma);
      AugmentedImage p = g;
      p.image = perturb_intensity(g.image, *basis, alphas);
      out.push_back(std::move(p));
    }
  }
  return out;
}

std::vector<std::size_t> balance_classes(std::span<const int> labels, std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      pos.push_back(i);
    } else if (labels[i] == 0) {
      neg.push_back(i);
    } else {
      throw DataError("labels must be 0 or 1");
    }
  }
  Rng rng(seed);
  auto& major = pos.size() > neg.size() ? pos : neg;
  const std::size_t keep = std::min(pos.size(), neg.size());
  if (keep > 0) {
    rng.shuffle(std::span<std::size_t>(major));
    major.resize(keep);
  }
  std::vector<std::size_t> out;
  out.insert(out.end(), pos.begin(), pos.end());
  out.insert(out.end(), neg.begin(), neg.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace shapeseg::data
