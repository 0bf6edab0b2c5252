#include "shapeseg/common/error.hpp"
#include "shapeseg/common/log.hpp"
#include "shapeseg/common/rng.hpp"
#include "shapeseg/data/image.hpp"
#include "shapeseg/modes/bundle.hpp"
#include "shapeseg/modes/estimate.hpp"
#include "shapeseg/modes/features.hpp"
#include "shapeseg/modes/hypotheses.hpp"
#include "shapeseg/shape/ssm.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

using namespace shapeseg;
using namespace shapeseg::modes;
using shape::Shape;
using shape::ShapeModel;
using shape::SpaceParams;

namespace {

// Eight landmarks on a ring around (32, 32); modes move single coordinates.
ShapeModel ring_model() {
  ShapeModel m;
  m.mean.resize(16);
  const double xs[8] = {32, 40, 44, 40, 32, 24, 20, 24};
  const double ys[8] = {20, 24, 32, 40, 44, 40, 32, 24};
  for (int i = 0; i < 8; ++i) {
    m.mean(2 * i) = xs[i];
    m.mean(2 * i + 1) = ys[i];
  }
  m.eigvecs = Eigen::MatrixXd::Zero(16, 3);
  m.eigvecs(0, 0) = 1.0;
  m.eigvecs(5, 1) = 1.0;
  m.eigvecs(9, 2) = 1.0;
  m.eigvals = Eigen::Vector3d(4.0, 1.0, 0.25);
  return m;
}

data::GrayImage gradient_image() {
  data::GrayImage img = data::GrayImage::filled(64, 64, 0.0);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) img.at(x, y) = (x + 2.0 * y) / 200.0;
  return img;
}

nn::CandidateScorer peaked(double center) {
  return [center](const Eigen::MatrixXd&, std::span<const double> c) {
    Eigen::VectorXd s(static_cast<Eigen::Index>(c.size()));
    for (std::size_t i = 0; i < c.size(); ++i) s(static_cast<Eigen::Index>(i)) = -std::abs(c[i] - center);
    return s;
  };
}

nn::NetworkModel linear_net(Eigen::Index in) {
  nn::NetworkModel n;
  n.layer_dims = {in, 1};
  n.weights = {Eigen::MatrixXd::Constant(1, in, 0.01)};
  n.biases = {Eigen::VectorXd::Zero(1)};
  return n;
}

}  // namespace

TEST(ModeFeatures, LengthAndSimpleCases) {
  const data::GrayImage img = gradient_image();
  const Shape mean = ring_model().mean_shape();
  EXPECT_EQ(extract_shape_patch_vector(img, mean, 9).size(), 8 * 81);
  const Eigen::VectorXd one = extract_shape_patch_vector(img, mean, 1);
  ASSERT_EQ(one.size(), 8);
  for (int i = 0; i < 8; ++i) {
    const auto p = mean.point(i);
    EXPECT_DOUBLE_EQ(one(i), img.at(static_cast<int>(p.x()), static_cast<int>(p.y())));
  }
  const Eigen::VectorXd c = extract_shape_patch_vector(data::GrayImage::filled(64, 64, 0.37), mean, 5);
  EXPECT_TRUE((c.array() == 0.37).all());
  EXPECT_THROW(extract_shape_patch_vector(img, mean, 4), DataError);
}

TEST(ModeFeatures, PaperScaleLength) {
  Eigen::VectorXd coords(288);
  for (int i = 0; i < 144; ++i) {
    coords(2 * i) = 100 + i;
    coords(2 * i + 1) = 200;
  }
  EXPECT_EQ(extract_shape_patch_vector(data::GrayImage::filled(400, 400, 0.1), Shape(coords, 2), 15).size(), 32400);
}

TEST(ModeHypotheses, GridCountsAndExclusion) {
  const ShapeModel m = ring_model();
  const ModeConfig cfg;
  const auto hyps = fabricate_mode_hypotheses(m, gradient_image(), m.mean_shape(), SpaceParams::identity(), 1, cfg);
  int neg = 0, pos = 0;
  for (const auto& h : hyps) {
    (h.label == 1 ? pos : neg)++;
    if (h.label == 0) {
      EXPECT_NE(h.u_hat, 0.0);
    }
  }
  EXPECT_EQ(neg, 24);
  EXPECT_EQ(pos, 2);
  EXPECT_TRUE(hyps[0].from_landmarks);
  EXPECT_TRUE(audit_mode_hypotheses(hyps, cfg).empty());
  EXPECT_EQ(ModeConfig::grid(3.0, 0.25).size(), 25u);
  EXPECT_THROW(ModeConfig::grid(3.0, 0.35), DataError);
}

TEST(ModeHypotheses, OffGridTruthKeepsGap) {
  const ShapeModel m = ring_model();
  Shape gt = m.mean_shape();
  gt.set_point(4, gt.point(4) + shape::Point(0.0, 0.3));  // b_3 = 0.3, sd 0.5
  ModeConfig cfg;
  const auto hyps = fabricate_mode_hypotheses(m, gradient_image(), gt, SpaceParams::identity(), 3, cfg);
  for (const auto& h : hyps) {
    EXPECT_NEAR(h.u_true, 0.6, 1e-12);
    if (h.label == 0) {
      EXPECT_GE(std::abs(h.u_hat - h.u_true), cfg.exclusion);
    }
  }
  std::vector<ModeHypothesis> bad{hyps.back()};
  bad[0].u_hat = bad[0].u_true + 0.1;
  EXPECT_EQ(audit_mode_hypotheses(bad, cfg).size(), 1u);
}

TEST(EstimateMode, PeakedStubRecovery) {
  const ShapeModel m = ring_model();
  const SpaceParams sp = SpaceParams::identity();
  ModeConfig cfg;
  const ModeEstimate e = estimate_mode(peaked(0.83), gradient_image(), m.mean_shape(), m, sp, 1, cfg);
  EXPECT_NEAR(e.u, 0.83, cfg.scan_step / 2);
  EXPECT_DOUBLE_EQ(e.b, e.u * 2.0);
  cfg.top_n = 1;
  EXPECT_DOUBLE_EQ(estimate_mode(peaked(0.83), gradient_image(), m.mean_shape(), m, sp, 1, cfg).u, 0.85);
  const ModeEstimate far = estimate_mode(peaked(7.0), gradient_image(), m.mean_shape(), m, sp, 2, cfg);
  EXPECT_LE(std::abs(far.u), cfg.range);
}

TEST(EstimateMode, FlatScoresKeepMean) {
  int warnings = 0;
  log::set_warning_sink([&](const std::string&) { ++warnings; });
  const ShapeModel m = ring_model();
  auto flat = [](const Eigen::MatrixXd& f, std::span<const double>) {
    return Eigen::VectorXd::Zero(f.cols()).eval();
  };
  const ModeEstimate e = estimate_mode(flat, gradient_image(), m.mean_shape(), m, SpaceParams::identity(), 1, {});
  log::reset_warning_sink();
  EXPECT_TRUE(e.degenerate);
  EXPECT_EQ(e.b, 0.0);
  EXPECT_EQ(warnings, 1);
}

TEST(ModeRecursion, EnforcesOrder) {
  const ShapeModel m = ring_model();
  ModeRecursion rec(m, SpaceParams::identity());
  EXPECT_THROW(rec.apply(2, 1.0), DataError);
  rec.apply(1, 1.0);
  EXPECT_THROW(rec.apply(1, 1.0), DataError);
  EXPECT_THROW(rec.step(3, peaked(0), gradient_image(), {}), DataError);
  rec.apply(2, 0.5);
  rec.apply(3, 0.1);
  EXPECT_THROW(rec.apply(4, 0.0), DataError);
  EXPECT_EQ(rec.stage(), 3);
}

TEST(ModeRecursion, MatchesSynthesis) {
  const ShapeModel m = ring_model();
  const SpaceParams sp{{3.0, -1.0}, 0.12, {1.3, 0.8}};
  const Eigen::Vector3d b(1.5, -0.7, 0.4);
  ModeRecursion rec(m, sp);
  for (int k = 1; k <= 3; ++k) {
    rec.apply(k, b(k - 1));
    Eigen::VectorXd partial = Eigen::VectorXd::Zero(3);
    partial.head(k) = b.head(k);
    const Shape direct = shape::synthesize_shape(m, {partial}, sp);
    EXPECT_LT((rec.current().coords() - direct.coords()).cwiseAbs().maxCoeff(), 1e-12);
  }
  const shape::ShapeWeights back = shape::project_shape(m, rec.current(), sp);
  EXPECT_LT((back.b - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Segment, ZeroModesGiveMeanShape) {
  const ShapeModel m = ring_model();
  const SpaceParams sp{{1.0, 2.0}, 0.05, {1.1, 0.9}};
  const SegmentResult r = segment(gradient_image(), sp, m, std::span<const nn::CandidateScorer>{}, 0, {});
  ASSERT_EQ(r.stages.size(), 1u);
  EXPECT_EQ(r.final_shape().coords(), shape::apply_space(sp, m.mean_shape()).coords());
}

TEST(Segment, MissingDetectorFailsBeforeWork) {
  const ShapeModel m = ring_model();
  int calls = 0;
  const std::vector<nn::CandidateScorer> one{[&](const Eigen::MatrixXd& f, std::span<const double> c) {
    ++calls;
    return peaked(0)(f, c);
  }};
  EXPECT_THROW(segment(gradient_image(), SpaceParams::identity(), m, one, 2, {}), DataError);
  EXPECT_EQ(calls, 0);
  const std::vector<nn::CandidateScorer> four(4, peaked(0));
  EXPECT_THROW(segment(gradient_image(), SpaceParams::identity(), m, four, 4, {}), DataError);
}

TEST(Segment, PerfectStubsWithinGridBudget) {
  const ShapeModel m = ring_model();
  const SpaceParams sp = SpaceParams::identity();
  const Eigen::Vector3d u(1.23, -0.41, 2.07);
  std::vector<nn::CandidateScorer> stubs;
  for (int k = 0; k < 3; ++k) stubs.push_back(peaked(u(k)));
  const ModeConfig cfg;
  const SegmentResult r = segment(gradient_image(), sp, m, stubs, 3, cfg);
  Eigen::VectorXd b(3);
  for (int k = 0; k < 3; ++k) b(k) = u(k) * std::sqrt(m.eigvals(k));
  const Shape truth = shape::synthesize_shape(m, {b}, sp);
  const double rms = std::sqrt((r.final_shape().coords() - truth.coords()).squaredNorm() / 8.0);
  EXPECT_LE(rms, 2 * cfg.scan_step * std::sqrt(m.eigvals(0)));
  for (std::size_t k = 0; k < r.weights.size(); ++k) EXPECT_LE(std::abs(r.weights[k]), 3 * std::sqrt(m.eigvals(k)));
}

TEST(ModeDetectors, DimensionCheckAndBundle) {
  const ShapeModel m = ring_model();
  ModeDetectorSet set;
  set.cfg.q = 3;
  set.detectors = {linear_net(8 * 9), linear_net(8 * 9)};
  EXPECT_NO_THROW(segment(gradient_image(), SpaceParams::identity(), m, set, 2));
  ModeDetectorSet wrong = set;
  wrong.detectors[1] = linear_net(10);
  EXPECT_THROW(segment(gradient_image(), SpaceParams::identity(), m, wrong, 2), DataError);

  ShapeBundle bundle;
  bundle.models = {m};
  bundle.detectors = set;
  const auto dir = std::filesystem::temp_directory_path() / "shapeseg_shape_bundle_test";
  std::filesystem::remove_all(dir);
  save_shape_bundle(dir, bundle);
  const ShapeBundle back = load_shape_bundle(dir);
  EXPECT_EQ(back.detectors.modes(), 2);
  EXPECT_EQ(back.detectors.cfg.q, 3);
  EXPECT_EQ(back.models[0].mean, m.mean);
  EXPECT_FALSE(back.split.has_value());
  std::filesystem::remove(dir / "mode_2.json");
  EXPECT_THROW(load_shape_bundle(dir), DataError);
  std::filesystem::remove_all(dir);
}
