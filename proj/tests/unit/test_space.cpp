#include "shapeseg/common/error.hpp"
#include "shapeseg/common/log.hpp"
#include "shapeseg/common/rng.hpp"
#include "shapeseg/data/augment.hpp"
#include "shapeseg/data/image.hpp"
#include "shapeseg/space/bundle.hpp"
#include "shapeseg/space/estimate.hpp"
#include "shapeseg/space/line.hpp"
#include "shapeseg/space/orientation.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

using namespace shapeseg;
using namespace shapeseg::space;

namespace {

struct WarningCounter {
  int count = 0;
  WarningCounter() {
    log::set_warning_sink([this](const std::string&) { ++count; });
  }
  ~WarningCounter() { log::reset_warning_sink(); }
};

nn::CandidateScorer peaked(double center) {
  return [center](const Eigen::MatrixXd&, std::span<const double> c) {
    Eigen::VectorXd s(static_cast<Eigen::Index>(c.size()));
    for (std::size_t i = 0; i < c.size(); ++i) s(static_cast<Eigen::Index>(i)) = std::exp(-std::abs(c[i] - center));
    return s;
  };
}

nn::CandidateScorer flat() {
  return [](const Eigen::MatrixXd&, std::span<const double> c) {
    return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(c.size()), 0.5).eval();
  };
}

data::GrayImage box_image(int w, int h, double x0, double y0, double x1, double y1) {
  data::GrayImage img = data::GrayImage::filled(w, h, 0.2);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (x >= x0 && x <= x1 && y >= y0 && y <= y1) img.at(x, y) = 0.7;
  return img;
}

}  // namespace

TEST(LineHypotheses, PositivesAroundGroundTruth) {
  const data::GrayImage img = data::GrayImage::filled(200, 200, 0.3);
  Rng rng(1);
  const auto hyps = extract_line_hypotheses(img, 100.0, 1, 7, LineLabelRule{}, 0, rng);
  std::set<int> pos, neg;
  for (const auto& h : hyps) (h.label == 1 ? pos : neg).insert(h.position);
  EXPECT_EQ(pos, (std::set<int>{99, 100, 101}));
  EXPECT_FALSE(neg.count(103));
  EXPECT_FALSE(neg.count(97));
  EXPECT_TRUE(neg.count(105));
  EXPECT_TRUE(neg.count(95));
  EXPECT_EQ(neg.size(), 200u - 9u);
  EXPECT_TRUE(audit_line_hypotheses(hyps, LineLabelRule{}).empty());
  EXPECT_EQ(hyps.front().patch.size(), 200 * 15);
}

TEST(LineHypotheses, NegativeSubsamplingKeepsPartition) {
  const data::GrayImage img = data::GrayImage::filled(64, 80, 0.3);
  Rng rng(2);
  for (int line = 1; line <= 4; ++line) {
    const auto hyps = extract_line_hypotheses(img, 30.4, line, 3, LineLabelRule{}, 3, rng);
    int pos = 0, neg = 0;
    for (const auto& h : hyps) {
      (h.label == 1 ? pos : neg)++;
      const double d = std::abs(h.position - 30.4);
      EXPECT_TRUE(h.label == 1 ? d <= 1.0 : d >= 5.0);
    }
    EXPECT_EQ(pos, 2);
    EXPECT_EQ(neg, 6);
  }
}

TEST(LineHypotheses, AuditFlagsGapSample) {
  LineHypothesis bad{1, 103, 100.0, 0, {}};
  LineHypothesis good{1, 100, 100.0, 1, {}};
  const std::vector<LineHypothesis> hyps{good, bad};
  EXPECT_EQ(audit_line_hypotheses(hyps, LineLabelRule{}).size(), 1u);
}

TEST(LineHypotheses, RejectsTruthOutsideImage) {
  Rng rng(3);
  EXPECT_THROW(extract_line_hypotheses(data::GrayImage::filled(50, 50, 0), 60, 3, 7, {}, 3, rng), DataError);
}

TEST(LineHypotheses, ReflectedPositiveStaysPositive) {
  const data::GrayImage img = box_image(64, 64, 20, 10, 40, 50);
  Rng rng(4);
  const auto left = extract_line_hypotheses(img, 20.0, 3, 3, {}, 0, rng);
  const data::GrayImage mirrored = data::flip_horizontal(img);
  const auto right = extract_line_hypotheses(mirrored, 63.0 - 20.0, 4, 3, {}, 0, rng);
  for (const auto& h : left) {
    if (h.label != 1) continue;
    const auto it = std::find_if(right.begin(), right.end(),
                                 [&](const LineHypothesis& r) { return r.position == 63 - h.position; });
    ASSERT_NE(it, right.end());
    EXPECT_EQ(it->label, 1);
  }
}

TEST(LineDetector, InputDimensionAtDeskScale) {
  const data::GrayImage img = data::GrayImage::filled(256, 256, 0.1);
  EXPECT_EQ(line_strip(img, 1, 40, 7).size(), 3840);
  EXPECT_EQ(line_strip(img, 3, 40, 7).size(), 3840);
}

TEST(DetectLine, PeakedStub) {
  const data::GrayImage img = data::GrayImage::filled(200, 160, 0.1);
  EXPECT_DOUBLE_EQ(detect_line(peaked(100.5), img, 1, 7, 10).position, 100.5);
  EXPECT_DOUBLE_EQ(detect_line(peaked(100.0), img, 1, 7, 9).position, 100.0);
  EXPECT_DOUBLE_EQ(detect_line(peaked(73.2), img, 3, 7, 1).position, 73.0);
}

TEST(DetectLine, ShiftEquivariant) {
  const data::GrayImage img = data::GrayImage::filled(120, 120, 0.1);
  auto skewed = [](double c) {
    return [c](const Eigen::MatrixXd&, std::span<const double> p) {
      Eigen::VectorXd s(static_cast<Eigen::Index>(p.size()));
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = p[i] - c;
        s(static_cast<Eigen::Index>(i)) = d < 0 ? -0.7 * d * d : -0.2 * d - 0.01 * d * d;
      }
      return s;
    };
  };
  const double base = detect_line(skewed(50.0), img, 2, 5, 10).position;
  for (int k : {-7, 3, 12}) EXPECT_DOUBLE_EQ(detect_line(skewed(50.0 + k), img, 2, 5, 10).position, base + k);
}

TEST(DetectLine, FlatScoresGiveMidpointAndWarning) {
  WarningCounter w;
  const LineDetection d = detect_line(flat(), data::GrayImage::filled(90, 61, 0.0), 1, 3, 10);
  EXPECT_TRUE(d.degenerate);
  EXPECT_DOUBLE_EQ(d.position, 30.0);
  EXPECT_EQ(w.count, 1);
}

TEST(DeriveBox, Examples) {
  const shape::Box b = derive_box(10, 100, 20, 120);
  EXPECT_EQ(b.center, shape::Point(70, 55));
  EXPECT_EQ(b.size, shape::Point(100, 90));
  const shape::Box u = derive_box(0, 1, 0, 1);
  EXPECT_EQ(u.center, shape::Point(0.5, 0.5));
  EXPECT_EQ(u.size, shape::Point(1, 1));
  EXPECT_THROW(derive_box(10, 10, 0, 5), DataError);
  const auto lines = box_lines(b);
  EXPECT_EQ(lines, (std::array<double, 4>{10, 100, 20, 120}));
}

TEST(OrientationHypotheses, BandsAndAudit) {
  const data::GrayImage img = box_image(96, 96, 20, 25, 70, 75);
  const shape::Box box{{45, 50}, {50, 50}};
  OrientationScan scan;
  scan.crop_side = 16;
  Rng rng(5);
  const OrientationRule rule;
  const auto hyps = extract_orientation_hypotheses(img, box, 0.05, rule, scan, 4, 3, rng);
  ASSERT_EQ(hyps.size(), 16u);
  EXPECT_EQ(hyps[0].label, 1);
  EXPECT_EQ(hyps[0].theta_hat, 0.05);
  for (const auto& h : hyps) {
    const double d = std::abs(h.theta_hat - 0.05);
    if (h.label == 1) EXPECT_LE(d, 0.017);
    else EXPECT_GE(d, 0.034);
    EXPECT_LE(std::abs(h.theta_hat), scan.range + 1e-12);
    EXPECT_EQ(h.patch.size(), 256);
  }
  EXPECT_TRUE(audit_orientation_hypotheses(hyps, rule).empty());
  const std::vector<OrientationHypothesis> gap{{0.07, 0.05, 0, {}}, {0.07, 0.05, 1, {}}, {0.10, 0.05, 0, {}}};
  EXPECT_EQ(audit_orientation_hypotheses(gap, rule).size(), 2u);
}

TEST(DetectOrientation, GridSizeAndPeak) {
  OrientationScan scan;
  EXPECT_EQ(scan.grid().size(), 305u);
  scan.crop_side = 8;
  const data::GrayImage img = box_image(64, 64, 10, 10, 50, 50);
  const shape::Box box{{30, 30}, {40, 40}};
  std::size_t seen = 0;
  auto counting = [&](const Eigen::MatrixXd& f, std::span<const double> c) {
    seen = static_cast<std::size_t>(f.cols());
    return peaked(0.1)(f, c);
  };
  const double theta = detect_orientation(counting, img, box, scan, 10).theta;
  EXPECT_EQ(seen, 305u);
  EXPECT_NEAR(theta, 0.1, scan.step / 2);
  // top_n = 1 returns the grid angle nearest the peak.
  const double one = detect_orientation(peaked(0.1), img, box, scan, 1).theta;
  EXPECT_DOUBLE_EQ(one, 59 * scan.step);
}

TEST(DetectOrientation, FlatScoresGiveZero) {
  WarningCounter w;
  OrientationScan scan;
  scan.crop_side = 4;
  const auto d = detect_orientation(flat(), data::GrayImage::filled(32, 32, 0.2), {{16, 16}, {10, 10}}, scan, 10);
  EXPECT_TRUE(d.degenerate);
  EXPECT_EQ(d.theta, 0.0);
  EXPECT_EQ(w.count, 1);
}

TEST(EstimateSpace, PerfectStubsRecoverBox) {
  const data::GrayImage img = box_image(128, 128, 30, 20, 90, 100);
  OrientationScan scan;
  scan.crop_side = 8;
  SpaceScorers s{{peaked(20), peaked(100), peaked(30), peaked(90)}, peaked(0.05)};
  const SpaceEstimate e = estimate_space(img, s, 7, 10, scan);
  EXPECT_NEAR(e.box.center.x(), 60, 1.0);
  EXPECT_NEAR(e.box.center.y(), 60, 1.0);
  EXPECT_NEAR(e.box.size.x(), 60, 1.0);
  EXPECT_NEAR(e.box.size.y(), 80, 1.0);
  EXPECT_NEAR(e.theta, 0.05, scan.step);
  const shape::SpaceParams sp = e.params();
  EXPECT_EQ(sp.translation, e.box.center);
  EXPECT_EQ(sp.scale, e.box.size);
}

TEST(EstimateSpace, LineOrderDoesNotMatter) {
  const data::GrayImage img = box_image(96, 96, 20, 20, 70, 80);
  OrientationScan scan;
  scan.crop_side = 8;
  SpaceScorers s{{peaked(20.3), peaked(80.6), peaked(19.9), peaked(70.2)}, peaked(-0.02)};
  const SpaceEstimate ref = estimate_space(img, s, 5, 10, scan);
  std::array<int, 4> order{1, 2, 3, 4};
  do {
    const SpaceEstimate e = estimate_space(img, s, 5, 10, scan, order, 2);
    EXPECT_EQ(e.lines, ref.lines);
    EXPECT_EQ(e.theta, ref.theta);
  } while (std::next_permutation(order.begin(), order.end()));
  EXPECT_THROW(estimate_space(img, s, 5, 10, scan, {1, 1, 3, 4}), DataError);
}

TEST(EstimateSpace, DegenerateBoxStopsBeforeOrientation) {
  WarningCounter w;
  bool orientation_called = false;
  SpaceScorers s{{flat(), flat(), flat(), flat()},
                 [&](const Eigen::MatrixXd& f, std::span<const double> c) {
                   orientation_called = true;
                   return peaked(0)(f, c);
                 }};
  EXPECT_THROW(estimate_space(data::GrayImage::filled(40, 40, 0.1), s, 3, 10, OrientationScan{}), DataError);
  EXPECT_FALSE(orientation_called);
}

TEST(EstimateSpace, RejectsMismatchedDims) {
  SpaceDetectorSet set;
  set.image_width = 32;
  set.image_height = 32;
  set.r = 2;
  set.scan.crop_side = 4;
  for (int l = 0; l < 4; ++l) {
    set.lines[l].layer_dims = {32 * 5, 1};
    set.lines[l].weights = {Eigen::MatrixXd::Zero(1, 160)};
    set.lines[l].biases = {Eigen::VectorXd::Zero(1)};
  }
  set.orientation.layer_dims = {16, 1};
  set.orientation.weights = {Eigen::MatrixXd::Zero(1, 16)};
  set.orientation.biases = {Eigen::VectorXd::Zero(1)};
  EXPECT_NO_THROW(set.validate());
  try {
    estimate_space(data::GrayImage::filled(40, 32, 0.1), set);
    FAIL();
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("40x32"), std::string::npos);
    EXPECT_NE(msg.find("32x32"), std::string::npos);
  }

  const auto dir = std::filesystem::temp_directory_path() / "shapeseg_space_bundle_test";
  std::filesystem::remove_all(dir);
  save_space_bundle(dir, set);
  int files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++files;
  EXPECT_EQ(files, 6);
  const SpaceDetectorSet back = load_space_bundle(dir);
  EXPECT_EQ(back.image_width, 32);
  EXPECT_EQ(back.lines[2].weights, set.lines[2].weights);
  std::filesystem::remove_all(dir);
}
