#include "shapeseg/common/error.hpp"
#include "shapeseg/common/json_io.hpp"
#include "shapeseg/common/rng.hpp"
#include "shapeseg/data/augment.hpp"
#include "shapeseg/data/image.hpp"
#include "shapeseg/data/image_io.hpp"
#include "shapeseg/data/manifest.hpp"
#include "shapeseg/data/raster.hpp"
#include "shapeseg/data/synthetic.hpp"
#include "shapeseg/shape/io.hpp"
#include "shapeseg/shape/ssm.hpp"
#include "shapeseg/space/line.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <numbers>

using namespace shapeseg;
using namespace shapeseg::data;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("shapeseg_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::map<std::string, std::string> tree_bytes(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  return out;
}

GrayImage ramp(int w, int h) {
  GrayImage img = GrayImage::filled(w, h, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(x, y) = 0.1 + 0.004 * x + 0.002 * y;
  return img;
}

SyntheticSpec small_spec() {
  SyntheticSpec s;
  s.count = 4;
  s.width = 96;
  s.height = 96;
  s.landmarks_per_side = 8;
  s.mode_rms = {0.03, 0.02, 0.01};
  s.seed = 5;
  return s;
}

}  // namespace

TEST(ImageIo, NormalizationExamples) {
  const fs::path dir = scratch("pgm");
  RawImage raw{3, 1, 4095, {4095, 0, 2048}};
  write_pgm(dir / "a.pgm", raw);
  const GrayImage img = load_and_normalize(dir / "a.pgm", 12);
  EXPECT_DOUBLE_EQ(img.at(0, 0), 4095.0 / 4096.0);
  EXPECT_DOUBLE_EQ(img.at(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(img.at(2, 0), 0.5);
  const RawImage back = read_pgm(dir / "a.pgm");
  EXPECT_EQ(back.values, raw.values);
  EXPECT_EQ(quantize(img, 12).values, raw.values);
  fs::remove_all(dir);
}

TEST(ImageIo, RejectsValuesBeyondBitDepth) {
  EXPECT_THROW(normalize_raw(RawImage{1, 1, 65535, {4096}}, 12), DataError);
  EXPECT_NO_THROW(normalize_raw(RawImage{1, 1, 65535, {4095}}, 12));
}

TEST(ImageIo, NormalizationIsOrderPreserving) {
  RawImage raw{64, 64, 4095, {}};
  for (int i = 0; i < 4096; ++i) raw.values.push_back(static_cast<std::uint16_t>(i));
  const GrayImage img = normalize_raw(raw, 12);
  for (std::size_t i = 1; i < img.pixels.size(); ++i) EXPECT_LT(img.pixels[i - 1], img.pixels[i]);
  EXPECT_GE(img.pixels.front(), 0.0);
  EXPECT_LT(img.pixels.back(), 1.0);
}

TEST(ImageIo, PngRoundTrip) {
  const fs::path dir = scratch("png");
  std::vector<std::uint8_t> rgb(4 * 3 * 3);
  for (std::size_t i = 0; i < rgb.size(); ++i) rgb[i] = static_cast<std::uint8_t>(i * 7);
  write_png_rgb(dir / "c.png", 4, 3, rgb);
  const RawImage back = read_png(dir / "c.png");
  EXPECT_EQ(back.width, 4);
  EXPECT_EQ(back.height, 3);
  fs::remove_all(dir);
}

TEST(Resize, IdentityAndConstant) {
  const GrayImage r = ramp(20, 15);
  const GrayImage same = resize_image(r, 20, 15);
  for (std::size_t i = 0; i < r.pixels.size(); ++i) EXPECT_NEAR(same.pixels[i], r.pixels[i], 1e-12);
  const GrayImage c = resize_image(GrayImage::filled(9, 7, 0.3), 23, 11);
  for (double v : c.pixels) EXPECT_NEAR(v, 0.3, 1e-12);
}

TEST(Resize, UpsampledRampStaysLinear) {
  const GrayImage r = ramp(32, 32);
  const GrayImage up = resize_image(r, 64, 64);
  EXPECT_NEAR(up.spacing.x(), 0.5, 1e-12);
  for (int y = 8; y < 56; ++y)
    for (int x = 8; x < 56; ++x) {
      const double sx = (x + 0.5) / 2.0 - 0.5, sy = (y + 0.5) / 2.0 - 0.5;
      EXPECT_NEAR(up.at(x, y), 0.1 + 0.004 * sx + 0.002 * sy, 1e-3);
    }
}

TEST(Augment, FlipTwiceIsIdentity) {
  const GrayImage r = ramp(11, 6);
  EXPECT_EQ(flip_horizontal(flip_horizontal(r)).pixels, r.pixels);
  EXPECT_EQ(flip_vertical(flip_vertical(r)).pixels, r.pixels);
  EXPECT_EQ(flip_horizontal(r).at(0, 2), r.at(10, 2));
  Eigen::VectorXd v(8);
  v << 1, 2, 3, 4, 5, 6, 7, 8;
  const shape::Shape s(v, 2);
  EXPECT_EQ(flip_shape_horizontal(flip_shape_horizontal(s, 11), 11).coords(), s.coords());
  const shape::Shape f = flip_shape_horizontal(s, 11);
  EXPECT_EQ(f.point(0), shape::Point(10 - 5, 6));  // side 1 moved to side 0
}

TEST(Augment, ZeroAlphasLeaveImage) {
  std::vector<GrayImage> imgs;
  for (int i = 0; i < 5; ++i) {
    GrayImage g = ramp(16, 16);
    for (auto& p : g.pixels) p = std::min(0.99, p * (1.0 + 0.1 * i));
    imgs.push_back(g);
  }
  const IntensityBasis b = fit_intensity_basis(imgs, 3, 8);
  const std::vector<double> zero(3, 0.0);
  EXPECT_EQ(perturb_intensity(imgs[0], b, zero).pixels, imgs[0].pixels);
  EXPECT_THROW(fit_intensity_basis(imgs, 5, 8), DataError);
}

TEST(Augment, SingleComponentHandFormula) {
  IntensityBasis b;
  b.side = 4;
  b.mean = Eigen::VectorXd::Zero(16);
  b.components = Eigen::MatrixXd::Zero(16, 1);
  for (int i = 0; i < 16; ++i) b.components(i, 0) = (i % 3 == 0 ? 1.0 : -0.5);
  b.components.col(0).normalize();
  b.eigvals = Eigen::VectorXd::Constant(1, 0.8);
  const GrayImage img = ramp(4, 4);
  const double alpha = 0.15;
  const GrayImage out = perturb_intensity(img, b, std::vector<double>{alpha});
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x)
      EXPECT_NEAR(out.at(x, y), img.at(x, y) + alpha * 0.8 * b.components(y * 4 + x, 0), 1e-12);
}

TEST(Augment, BalanceClasses) {
  const std::vector<int> labels{0, 0, 1, 0, 0, 1, 0};
  const auto keep = balance_classes(labels, 3);
  ASSERT_EQ(keep.size(), 4u);
  int pos = 0;
  for (std::size_t k : keep) pos += labels[k];
  EXPECT_EQ(pos, 2);
  EXPECT_TRUE(std::is_sorted(keep.begin(), keep.end()));
  EXPECT_EQ(balance_classes(labels, 3), keep);
}

TEST(Augment, AugmentedCopiesCarryGeometry) {
  AugmentedImage a{ramp(20, 20), shape::Shape(Eigen::Vector4d(2, 3, 5, 7)), 0.1, 0, false, false};
  AugmentConfig cfg;
  cfg.intensity_copies = 0;
  const std::vector<AugmentedImage> in{a};
  const auto out = augment_images(in, nullptr, cfg, true);
  ASSERT_EQ(out.size(), 3u);  // original, horizontal and vertical reflection
  EXPECT_EQ(out[0].image.pixels, a.image.pixels);
  int hflips = 0;
  for (const auto& o : out) {
    hflips += o.hflip;
    if (o.hflip != o.vflip) {
      EXPECT_DOUBLE_EQ(o.theta, -0.1);
    }
  }
  EXPECT_EQ(hflips, 1);
}

TEST(Raster, SquareCountsPixelCenters) {
  const std::vector<shape::Point> sq{{2.5, 3.5}, {12.5, 3.5}, {12.5, 13.5}, {2.5, 13.5}};
  EXPECT_EQ(rasterize_polygon(sq, 20, 20).count(), 100u);
  const std::vector<shape::Point> flat{{1, 1}, {5, 1}, {9, 1}};
  EXPECT_EQ(rasterize_polygon(flat, 20, 20).count(), 0u);
}

TEST(Raster, DiskArea) {
  std::vector<shape::Point> disk;
  for (int i = 0; i < 360; ++i) {
    const double a = 2 * std::numbers::pi * i / 360;
    disk.emplace_back(50 + 30 * std::cos(a), 50 + 30 * std::sin(a));
  }
  const double area = std::numbers::pi * 900;
  EXPECT_NEAR(static_cast<double>(rasterize_polygon(disk, 100, 100).count()), area, 0.02 * area);
}

TEST(Raster, AbuttingPolygonsShareNoPixels) {
  const std::vector<shape::Point> left{{0, 0}, {5, 0}, {5, 8}, {0, 8}};
  const std::vector<shape::Point> right{{5, 0}, {9, 0}, {9, 8}, {5, 8}};
  const Mask a = rasterize_polygon(left, 12, 12), b = rasterize_polygon(right, 12, 12);
  for (std::size_t i = 0; i < a.values.size(); ++i) EXPECT_FALSE(a.values[i] && b.values[i]);
}

TEST(Raster, SelfIntersectionPolicy) {
  const std::vector<shape::Point> bowtie{{0, 0}, {10, 10}, {10, 0}, {0, 10}};
  EXPECT_TRUE(polygon_self_intersects(bowtie));
  EXPECT_THROW(rasterize_polygon(bowtie, 12, 12), DataError);
  EXPECT_GT(rasterize_polygon(bowtie, 12, 12, true).count(), 0u);
}

TEST(Synthetic, DeterministicBytes) {
  const SyntheticSpec spec = small_spec();
  const fs::path a = scratch("synth_a"), b = scratch("synth_b");
  write_synthetic_dataset(a, spec);
  write_synthetic_dataset(b, spec, 2);
  const auto ta = tree_bytes(a), tb = tree_bytes(b);
  EXPECT_EQ(ta, tb);
  int images = 0;
  for (const auto& [name, bytes] : ta) images += name.rfind("images/", 0) == 0;
  EXPECT_EQ(images, spec.count);
  const DatasetManifest m = load_manifest(a / "manifest.json");
  EXPECT_EQ(m.entries.size(), 4u);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Synthetic, GroundTruthIsSelfConsistent) {
  const SyntheticSpec spec = small_spec();
  for (int i = 0; i < 6; ++i) {
    const SyntheticSample s = generate_synthetic_sample(spec, i);
    const shape::ShapeModel model = synthetic_group_model(spec, s.truth.group);
    const Eigen::VectorXd b = shape::project_shape(model, s.landmarks, s.truth.space).b;
    EXPECT_LT((b - s.truth.weights).cwiseAbs().maxCoeff(), 1e-8);
    const auto lines = space::box_lines(shape::bounding_box(s.landmarks));
    const shape::Box box = space::derive_box(lines[0], lines[1], lines[2], lines[3]);
    EXPECT_LT((box.center - s.truth.box.center).norm(), 1e-9);
    EXPECT_LT((box.size - s.truth.box.size).norm(), 1e-9);
    EXPECT_NO_THROW(s.image.validate());
    EXPECT_EQ(s.landmarks.sides(), 2);
  }
}

TEST(Synthetic, SpecRoundTripAndValidation) {
  const SyntheticSpec spec = small_spec();
  const SyntheticSpec back = synthetic_spec_from_json(synthetic_spec_to_json(spec));
  EXPECT_EQ(synthetic_spec_to_json(back), synthetic_spec_to_json(spec));
  SyntheticSpec bad = spec;
  bad.count = 0;
  EXPECT_THROW(bad.validate(), DataError);
  bad = spec;
  bad.mode_rms = {0.01, 0.02};
  EXPECT_THROW(bad.validate(), DataError);
}

TEST(Manifest, ResamplesToTargetDims) {
  const fs::path dir = scratch("manifest");
  SyntheticSpec spec = small_spec();
  spec.count = 1;
  write_synthetic_dataset(dir, spec);
  nlohmann::json doc = read_json_file(dir / "manifest.json");
  const Sample native = load_sample(load_manifest(dir / "manifest.json"), 0);
  doc["target_dims"] = {48, 48};
  write_json_file(dir / "half.json", doc);
  const Sample half = load_sample(load_manifest(dir / "half.json"), 0);
  EXPECT_EQ(half.image.width, 48);
  ASSERT_TRUE(half.landmarks && native.landmarks);
  const shape::Point p = native.landmarks->point(3), q = half.landmarks->point(3);
  EXPECT_NEAR(q.x(), (p.x() + 0.5) * 0.5 - 0.5, 1e-9);
  EXPECT_NEAR(q.y(), (p.y() + 0.5) * 0.5 - 0.5, 1e-9);
  EXPECT_NEAR(half.image.spacing.x(), 2 * native.image.spacing.x(), 1e-12);
  doc["entries"][0]["image_path"] = "images/missing.pgm";
  write_json_file(dir / "bad.json", doc);
  EXPECT_THROW(load_sample(load_manifest(dir / "bad.json"), 0), DataError);
  fs::remove_all(dir);
}
