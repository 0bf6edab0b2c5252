#include "shapeseg/common/error.hpp"
#include "shapeseg/common/rng.hpp"
#include "shapeseg/shape/frame.hpp"
#include "shapeseg/shape/groups.hpp"
#include "shapeseg/shape/interpolate.hpp"
#include "shapeseg/shape/io.hpp"
#include "shapeseg/shape/procrustes.hpp"
#include "shapeseg/shape/ssm.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <vector>

using namespace shapeseg;
using namespace shapeseg::shape;

namespace {

Shape random_shape(Rng& rng, int m, double spread = 1.0) {
  Eigen::VectorXd v(2 * m);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal(0.0, spread);
  return Shape(v);
}

Shape triangle() {
  Eigen::VectorXd v(6);
  v << 0, 0, 4, 0, 1, 3;
  return Shape(v);
}

std::vector<Shape> jittered_set(Rng& rng, const Shape& base, int n, double sigma) {
  std::vector<Shape> out;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd v = base.coords();
    for (Eigen::Index k = 0; k < v.size(); ++k) v(k) += rng.normal(0.0, sigma);
    out.emplace_back(v, base.sides());
  }
  return out;
}

ShapeModel model_from(const Eigen::VectorXd& mean, const Eigen::MatrixXd& vecs, const Eigen::VectorXd& vals) {
  ShapeModel m;
  m.mean = mean;
  m.eigvecs = vecs;
  m.eigvals = vals;
  return m;
}

}  // namespace

TEST(Shape, SpaceTransformRoundTrip) {
  Rng rng(1);
  const Shape s = random_shape(rng, 7);
  SpaceParams sp{{3.0, -2.0}, 0.3, {1.5, 0.7}};
  const Shape back = apply_space_inverse(sp, apply_space(sp, s));
  EXPECT_LT((back.coords() - s.coords()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(wrap_angle(3 * std::numbers::pi), std::numbers::pi, 1e-12);
  EXPECT_NEAR(wrap_angle(-std::numbers::pi), std::numbers::pi, 1e-12);
}

TEST(Shape, InvalidScaleRejected) {
  SpaceParams sp;
  sp.scale = {0.0, 1.0};
  EXPECT_THROW(sp.validate(), DataError);
}

TEST(Procrustes, SingleShapeHasZeroResidual) {
  const Shape t = triangle();
  const ProcrustesResult r = procrustes_align(std::span<const Shape>(&t, 1));
  ASSERT_EQ(r.transforms.size(), 1u);
  EXPECT_NEAR(r.transforms[0].angle, 0.0, 1e-12);
  EXPECT_LT(r.residual_trace.back(), 1e-20);
  EXPECT_LT((r.aligned[0].coords() - r.mean.coords()).norm(), 1e-12);
}

TEST(Procrustes, RotatedTranslatedTriangle) {
  const Shape a = triangle();
  const Similarity move{1.0, std::numbers::pi / 2, {5.0, -3.0}};
  const std::vector<Shape> shapes{a, move.apply(a)};
  const ProcrustesResult r = procrustes_align(shapes);
  EXPECT_LE(r.residual_trace.back(), 1e-10);
  EXPECT_LE((r.aligned[0].coords() - r.aligned[1].coords()).squaredNorm(), 1e-10);
}

TEST(Procrustes, TranslationOnlyCopies) {
  const Shape a = triangle();
  const std::vector<Point> offsets{{0, 0}, {2.5, -1}, {-7, 4}};
  std::vector<Shape> shapes;
  for (const auto& o : offsets) shapes.push_back(Similarity{1.0, 0.0, o}.apply(a));
  const ProcrustesResult r = procrustes_align(shapes);
  for (std::size_t i = 1; i < shapes.size(); ++i) {
    const Point rel = r.transforms[i].translation - r.transforms[0].translation;
    EXPECT_NEAR(rel.x(), offsets[i].x(), 1e-10);
    EXPECT_NEAR(rel.y(), offsets[i].y(), 1e-10);
  }
}

TEST(Procrustes, ResidualTraceNonIncreasing) {
  Rng rng(4);
  const Shape base = random_shape(rng, 12);
  std::vector<Shape> shapes;
  for (int i = 0; i < 15; ++i) {
    Shape s = jittered_set(rng, base, 1, 0.15)[0];
    shapes.push_back(Similarity{rng.uniform(0.5, 2.0), rng.uniform(-1, 1), {rng.normal(), rng.normal()}}.apply(s));
  }
  const ProcrustesResult r = procrustes_align(shapes);
  for (std::size_t i = 1; i < r.residual_trace.size(); ++i)
    EXPECT_LE(r.residual_trace[i], r.residual_trace[i - 1] * (1 + 1e-12));
  EXPECT_NEAR(r.mean.centroid().norm(), 0.0, 1e-12);
  EXPECT_NEAR(r.mean.coords().squaredNorm() / r.mean.landmark_count(), 1.0, 1e-12);
}

TEST(Procrustes, RejectsMismatchedCounts) {
  Rng rng(2);
  const std::vector<Shape> shapes{random_shape(rng, 4), random_shape(rng, 5)};
  EXPECT_THROW(procrustes_align(shapes), DataError);
}

TEST(Procrustes, FitSimilarityRecoversTransform) {
  Rng rng(3);
  const Shape s = random_shape(rng, 9);
  const Similarity t{1.7, -0.8, {4.0, 1.0}};
  const Similarity f = fit_similarity(s, t.apply(s));
  EXPECT_NEAR(f.scale, 1.7, 1e-10);
  EXPECT_NEAR(f.angle, -0.8, 1e-10);
  EXPECT_NEAR((f.translation - t.translation).norm(), 0.0, 1e-10);
  EXPECT_LT(fitted_residual(s, t.apply(s)), 1e-18);
}

TEST(Ssm, SelectModeCount) {
  EXPECT_EQ(select_mode_count(Eigen::Vector3d(9, 0.9, 0.1), 0.95), 2);
  EXPECT_EQ(select_mode_count(Eigen::Vector3d(9, 0.9, 0.1), 0.9), 1);
  EXPECT_EQ(select_mode_count(Eigen::Vector3d(9, 0.9, 0.1), 1.0), 3);
  EXPECT_EQ(select_mode_count(Eigen::Vector3d::Zero(), 0.95), 0);
}

TEST(Ssm, IdenticalShapesGiveMeanOnlyModel) {
  const std::vector<Shape> shapes(4, triangle());
  const ShapeModel m = build_ssm(shapes, 0.95);
  EXPECT_EQ(m.modes(), 0);
  EXPECT_EQ(m.mean, triangle().coords());
}

TEST(Ssm, SingleDirectionVariation) {
  Rng rng(5);
  const Shape base = random_shape(rng, 6);
  Eigen::VectorXd d(12);
  for (Eigen::Index i = 0; i < 12; ++i) d(i) = rng.normal();
  d.normalize();
  const std::vector<double> t{-1.5, -0.2, 0.4, 0.9, 1.3, -0.6};
  std::vector<Shape> shapes;
  for (double ti : t) shapes.emplace_back(base.coords() + ti * d);
  const ShapeModel m = build_ssm(shapes, 1.0);
  ASSERT_EQ(m.modes(), 1);
  double mean = 0, var = 0;
  for (double ti : t) mean += ti / t.size();
  for (double ti : t) var += (ti - mean) * (ti - mean) / (t.size() - 1);
  EXPECT_NEAR(m.eigvals(0), var, 1e-12);
  EXPECT_NEAR(std::abs(m.eigvecs.col(0).dot(d)), 1.0, 1e-12);
}

TEST(Ssm, ModelsAreOrthonormalAndDescending) {
  Rng rng(6);
  const auto shapes = jittered_set(rng, random_shape(rng, 10), 30, 0.1);
  const ShapeModel m = build_ssm(shapes, 0.99);
  EXPECT_NO_THROW(m.validate());
  for (Eigen::Index k = 1; k < m.modes(); ++k) EXPECT_GE(m.eigvals(k - 1), m.eigvals(k));
}

TEST(Ssm, SynthesizeExamples) {
  Eigen::VectorXd mean(4);
  mean << 1, 2, -1, 0.5;
  Eigen::MatrixXd p(4, 1);
  p << 1, 0, 0, 0;
  const ShapeModel m = model_from(mean, p, Eigen::VectorXd::Constant(1, 4.0));
  EXPECT_EQ(synthesize_shape(m, {Eigen::VectorXd::Zero(1)}, SpaceParams::identity()).coords(), mean);
  Eigen::VectorXd expect = mean + p.col(0);
  EXPECT_EQ(synthesize_shape(m, {Eigen::VectorXd::Ones(1)}, SpaceParams::identity()).coords(), expect);
  SpaceParams doubled;
  doubled.scale = {2.0, 2.0};
  EXPECT_LT((synthesize_shape(m, {}, doubled).coords() - 2.0 * mean).norm(), 1e-15);
  EXPECT_THROW(synthesize_shape(m, {Eigen::VectorXd::Ones(2)}, doubled), DataError);
}

TEST(Ssm, ProjectInvertsSynthesize) {
  Rng rng(7);
  const auto shapes = jittered_set(rng, random_shape(rng, 8), 25, 0.2);
  const ShapeModel m = build_ssm(shapes, 0.98);
  const SpaceParams sp{{40.0, 12.0}, 0.2, {30.0, 25.0}};
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd b(m.modes());
    for (Eigen::Index k = 0; k < b.size(); ++k) b(k) = rng.uniform(-3, 3) * std::sqrt(m.eigvals(k));
    const ShapeWeights back = project_shape(m, synthesize_shape(m, {b}, sp), sp);
    EXPECT_LT((back.b - b).cwiseAbs().maxCoeff(), 1e-10);
  }
  EXPECT_LT(project_shape(m, m.mean_shape(), SpaceParams::identity()).b.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Ssm, FullModelReconstructsTrainingShapes) {
  Rng rng(8);
  const Shape base = random_shape(rng, 6);
  std::vector<Shape> raw = jittered_set(rng, base, 40, 0.1);
  const ProcrustesResult gpa = procrustes_align(raw);
  const ShapeModel m = build_ssm(gpa.aligned, 1.0);
  EXPECT_LE(m.modes(), 2 * 6 - 4);
  for (const auto& s : gpa.aligned) {
    const ShapeWeights b = project_shape(m, s, SpaceParams::identity());
    const Shape rec = synthesize_shape(m, b, SpaceParams::identity());
    EXPECT_LE((rec.coords() - s.coords()).norm(), 1e-8);
  }
}

TEST(Ssm, ClampWeights) {
  const ShapeWeights c = clamp_weights({Eigen::Vector3d(0.0, 5.0, -7.0)}, Eigen::Vector3d(2.0, 1.0, 4.0));
  EXPECT_EQ(c.b(0), 0.0);
  EXPECT_EQ(c.b(1), 3.0);
  EXPECT_EQ(c.b(2), -6.0);
}

TEST(Ssm, TruncateModes) {
  Rng rng(9);
  const ShapeModel m = build_ssm(jittered_set(rng, random_shape(rng, 6), 20, 0.1), 1.0);
  const ShapeModel t = truncate_modes(m, 2);
  EXPECT_EQ(t.modes(), 2);
  EXPECT_EQ(t.eigvecs, m.eigvecs.leftCols(2));
  EXPECT_THROW(truncate_modes(m, m.modes() + 1), DataError);
}

TEST(Ssm, CovarianceOracle) {
  Rng rng(10);
  const auto shapes = jittered_set(rng, random_shape(rng, 5), 12, 0.3);
  const ShapeModel m = build_ssm(shapes, 1.0);
  Eigen::MatrixXd x(12, 10);
  for (int i = 0; i < 12; ++i) x.row(i) = shapes[i].coords().transpose();
  x.rowwise() -= x.colwise().mean();
  const Eigen::MatrixXd cov = x.transpose() * x / 11.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  for (Eigen::Index k = 0; k < m.modes(); ++k) {
    const Eigen::Index j = 9 - k;
    EXPECT_NEAR(m.eigvals(k), es.eigenvalues()(j), 1e-10 * es.eigenvalues()(9));
    EXPECT_NEAR(std::abs(m.eigvecs.col(k).dot(es.eigenvectors().col(j))), 1.0, 1e-8);
  }
}

TEST(Groups, EmSplitsTwoClusters) {
  Rng rng(11);
  std::vector<double> r;
  std::vector<int> truth;
  for (int i = 0; i < 100; ++i) {
    const bool hi = i % 2 == 1;
    r.push_back(rng.normal(hi ? 1.5 : 1.0, 0.01));
    truth.push_back(hi ? 1 : 0);
  }
  const auto split = cluster_aspect_ratios(r);
  ASSERT_TRUE(split.has_value());
  EXPECT_GT(split->threshold, 1.1);
  EXPECT_LT(split->threshold, 1.4);
  EXPECT_TRUE(split->fitted);
  int agree = 0;
  for (std::size_t i = 0; i < r.size(); ++i) agree += split->assignments[i] == truth[i];
  EXPECT_GE(agree, 95);
}

TEST(Groups, FixedThresholdBypassesEm) {
  const std::vector<double> r{1.0, 1.3, 1.22, 1.1, 1.5};
  const auto split = cluster_aspect_ratios(r, 1.22);
  ASSERT_TRUE(split.has_value());
  EXPECT_FALSE(split->fitted);
  EXPECT_EQ(split->assignments, (std::vector<int>{0, 1, 0, 0, 1}));
}

TEST(Groups, EqualRatiosFallBack) {
  const std::vector<double> r(6, 1.2);
  EXPECT_FALSE(cluster_aspect_ratios(r).has_value());
}

TEST(Groups, SelectModel) {
  std::vector<ShapeModel> models(2);
  models[0].group_id = 0;
  models[1].group_id = 1;
  GroupSplit split;
  split.threshold = 1.22;
  EXPECT_EQ(select_model(1.0, split, models).group_id, 0);
  EXPECT_EQ(select_model(1.5, split, models).group_id, 1);
  EXPECT_EQ(select_model(1.22, split, models).group_id, 0);
}

TEST(Interpolate, EqualArcGapsOnCircle) {
  SideAnnotation side;
  const int n = 720;
  for (int i = 0; i <= n; ++i) {
    const double a = 2 * std::numbers::pi * (i % n) / n;
    side.contour.emplace_back(100 * std::cos(a), 100 * std::sin(a));
  }
  for (int deg : {0, 45, 90, 180, 225, 270}) side.primaries.push_back(side.contour[deg * 2]);
  const std::vector<Point> pts = interpolate_side(side, 72);
  ASSERT_EQ(pts.size(), 72u);
  const std::vector<double> arcs = arc_positions(side.contour, pts);
  const double total = 2 * n * 100 * std::sin(std::numbers::pi / n);
  // 66 secondaries over 6 segments: 11 per segment, 12 equal gaps each.
  for (int seg = 0; seg < 6; ++seg) {
    const int first = seg * 12;
    auto arc_at = [&](int i) {
      double a = i < 72 ? arcs[i] : total;
      return a;
    };
    const double end = seg == 5 ? total : arc_at(first + 12);
    const double gap = (end - arc_at(first)) / 12.0;
    for (int j = 1; j <= 12; ++j) {
      const double prev = arc_at(first + j - 1);
      const double cur = j == 12 ? end : arc_at(first + j);
      EXPECT_NEAR(cur - prev, gap, 1e-6) << "segment " << seg << " gap " << j;
    }
  }
}

TEST(Interpolate, CountEqualToPrimariesKeepsThem) {
  SideAnnotation side;
  side.contour = {{0, 0}, {10, 0}, {10, 10}, {0, 10}, {0, 0}};
  side.primaries = {{0, 0}, {10, 0}, {10, 10}, {0, 10}};
  const auto pts = interpolate_side(side, 4);
  ASSERT_EQ(pts.size(), 4u);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(pts[i], side.primaries[i]);
}

TEST(Interpolate, RejectsFarPrimaryAndOpenContour) {
  SideAnnotation side;
  side.contour = {{0, 0}, {10, 0}, {10, 10}, {0, 10}, {0, 0}};
  side.primaries = {{0, 0}, {5, 5}};
  EXPECT_THROW(interpolate_side(side, 8), DataError);
  side.primaries = {{0, 0}};
  side.contour.pop_back();
  EXPECT_THROW(interpolate_side(side, 8), DataError);
}

TEST(Frame, SpaceFromBoxFillsBox) {
  Rng rng(12);
  const Shape mean = normalize_shape(random_shape(rng, 10));
  const Box box{{120.0, 80.0}, {60.0, 90.0}};
  for (double theta : {0.0, 0.1, -0.2}) {
    const SpaceParams sp = space_from_box(box, theta, mean);
    EXPECT_DOUBLE_EQ(sp.theta, theta);
    const Box fit = bounding_box(apply_space(sp, mean));
    EXPECT_NEAR((fit.center - box.center).norm(), 0.0, 1e-9);
    EXPECT_NEAR((fit.size - box.size).norm(), 0.0, 1e-9);
  }
  EXPECT_THROW(space_from_box(Box{{0, 0}, {0, 5}}, 0.0, mean), DataError);
}

TEST(Frame, BoxFrameModelIsValid) {
  Rng rng(13);
  const Shape base = random_shape(rng, 8);
  std::vector<Shape> shapes;
  std::vector<double> thetas;
  for (int i = 0; i < 12; ++i) {
    const double th = rng.uniform(-0.1, 0.1);
    Shape s = jittered_set(rng, base, 1, 0.05)[0];
    shapes.push_back(Similarity{50.0, th, {100, 100}}.apply(s));
    thetas.push_back(th);
  }
  const FrameModel fm = build_box_frame_model(shapes, thetas, 0.98, 1);
  EXPECT_NO_THROW(fm.model.validate());
  EXPECT_EQ(fm.model.group_id, 1);
  ASSERT_EQ(fm.spaces.size(), shapes.size());
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const Shape back = apply_space(fm.spaces[i], fm.frame_shapes[i]);
    EXPECT_LT((back.coords() - shapes[i].coords()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(ShapeIo, ModelAndLandmarksRoundTrip) {
  Rng rng(14);
  const ShapeModel m = build_ssm(jittered_set(rng, random_shape(rng, 6), 10, 0.1), 0.95, 1);
  const ShapeModel back = shape_model_from_json(shape_model_to_json(m));
  EXPECT_EQ(back.mean, m.mean);
  EXPECT_EQ(back.eigvecs, m.eigvecs);
  EXPECT_EQ(back.eigvals, m.eigvals);
  EXPECT_EQ(back.group_id, 1);

  LandmarkRecord rec;
  rec.image_path = "images/a.pgm";
  rec.group = 1;
  rec.landmarks = Shape(random_shape(rng, 4).coords(), 2);
  const LandmarkRecord r2 = landmarks_from_json(landmarks_to_json(rec));
  EXPECT_EQ(r2.landmarks.coords(), rec.landmarks.coords());
  EXPECT_EQ(r2.landmarks.sides(), 2);
  EXPECT_EQ(r2.group, 1);
}
