#include "shapeseg/common/error.hpp"
#include "shapeseg/common/log.hpp"
#include "shapeseg/common/rng.hpp"
#include "shapeseg/data/raster.hpp"
#include "shapeseg/eval/crossval.hpp"
#include "shapeseg/eval/metrics.hpp"
#include "shapeseg/eval/report.hpp"
#include "shapeseg/eval/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <set>

using namespace shapeseg;
using namespace shapeseg::eval;
using data::Mask;
using shape::Point;

namespace {

Mask from_indices(int w, int h, std::initializer_list<int> on) {
  Mask m = Mask::empty(w, h);
  for (int i : on) m.values[static_cast<std::size_t>(i)] = 1;
  return m;
}

Mask random_mask(Rng& rng, int side) {
  Mask m = Mask::empty(side, side);
  const double density = rng.uniform(0.1, 0.7);
  do {
    for (auto& v : m.values) v = rng.uniform() < density ? 1 : 0;
  } while (m.count() == 0);
  return m;
}

double brute_acd(const Mask& a, const Mask& b, const Eigen::Vector2d& spacing) {
  auto boundary = [](const Mask& m) {
    std::vector<Point> pts;
    for (int y = 0; y < m.height; ++y)
      for (int x = 0; x < m.width; ++x) {
        if (!m.at(x, y)) continue;
        bool edge = false;
        const int dx[4] = {-1, 1, 0, 0}, dy[4] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
          const int nx = x + dx[k], ny = y + dy[k];
          if (nx < 0 || ny < 0 || nx >= m.width || ny >= m.height || !m.at(nx, ny)) edge = true;
        }
        if (edge) pts.emplace_back(x, y);
      }
    return pts;
  };
  const auto pa = boundary(a), pb = boundary(b);
  auto mean_nearest = [&](const std::vector<Point>& from, const std::vector<Point>& to) {
    double sum = 0;
    for (const auto& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : to) best = std::min(best, (p - q).cwiseProduct(spacing).norm());
      sum += best;
    }
    return sum / from.size();
  };
  return 0.5 * (mean_nearest(pb, pa) + mean_nearest(pa, pb));
}

}  // namespace

TEST(Metrics, OverlapExamples) {
  const Mask a = from_indices(4, 4, {0, 1, 2, 3});
  const Mask b = from_indices(4, 4, {2, 3, 4, 5});
  const Mask c = from_indices(4, 4, {10, 11});
  EXPECT_DOUBLE_EQ(dsc(a, b), 0.5);
  EXPECT_DOUBLE_EQ(jaccard(a, b), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(dsc(a, a), 1.0);
  EXPECT_DOUBLE_EQ(jaccard(a, a), 1.0);
  EXPECT_DOUBLE_EQ(dsc(a, c), 0.0);
  EXPECT_DOUBLE_EQ(jaccard(a, c), 0.0);
}

TEST(Metrics, EmptyMasksScoreOneWithWarning) {
  int warnings = 0;
  log::set_warning_sink([&](const std::string&) { ++warnings; });
  const Mask e = Mask::empty(3, 3);
  EXPECT_EQ(dsc(e, e), 1.0);
  EXPECT_EQ(jaccard(e, e), 1.0);
  log::reset_warning_sink();
  EXPECT_EQ(warnings, 2);
}

TEST(Metrics, RandomMaskOracle) {
  Rng rng(2024);
  const Eigen::Vector2d spacing(0.7, 1.3);
  for (int t = 0; t < 1000; ++t) {
    const Mask a = random_mask(rng, 8), b = random_mask(rng, 8);
    std::size_t na = 0, nb = 0, both = 0;
    for (std::size_t i = 0; i < 64; ++i) {
      na += a.values[i];
      nb += b.values[i];
      both += a.values[i] && b.values[i];
    }
    const double d = dsc(a, b), j = jaccard(a, b);
    EXPECT_EQ(d, 2.0 * both / static_cast<double>(na + nb));
    EXPECT_EQ(j, both / static_cast<double>(na + nb - both));
    EXPECT_GE(d, j);
    EXPECT_NEAR(d, 2 * j / (1 + j), 1e-15);
    EXPECT_NEAR(acd_masks(a, b, spacing), brute_acd(a, b, spacing), 1e-9);
  }
}

TEST(Metrics, AcdExamples) {
  Contour a{{{{0, 0}, {10, 0}, {10, 10}, {0, 10}}}};
  EXPECT_DOUBLE_EQ(acd(a, a, {1, 1}), 0.0);
  Contour s1{{{{0, 0}, {20, 0}}}};
  Contour s2{{{{0, 3}, {20, 3}}}};
  EXPECT_NEAR(acd(s1, s2, {1, 1}), 3.0, 1e-12);
  Contour p1{{{{0, 0}}}}, p2{{{{10, 0}}}};
  EXPECT_NEAR(acd(p1, p2, {0.17, 0.17}), 1.7, 1e-12);
  EXPECT_NEAR(point_contour_distance({5, 4}, a, {2, 2}), 8.0, 1e-12);
}

TEST(Metrics, PearsonExamples) {
  const std::vector<double> x{1, 2, 3, 4}, y2{2, 4, 6, 8}, yn{-2, -4, -6, -8};
  EXPECT_NEAR(pearson_r(x, y2), 1.0, 1e-15);
  EXPECT_NEAR(pearson_r(x, yn), -1.0, 1e-15);
  const std::vector<double> a{1, 2, 3}, b{1, 1, 2};
  EXPECT_NEAR(pearson_r(a, b), 0.8660, 1e-4);
  const std::vector<double> c{5, 5, 5};
  EXPECT_THROW(pearson_r(a, c), DataError);
}

TEST(Metrics, ScoreShapesIdentical) {
  Eigen::VectorXd v(8);
  v << 2, 2, 12, 2, 12, 9, 2, 9;
  const shape::Shape s(v);
  const ShapeScores sc = score_shapes(s, s, 20, 20, {1, 1});
  EXPECT_EQ(sc.dsc, 1.0);
  EXPECT_EQ(sc.jaccard, 1.0);
  EXPECT_EQ(sc.acd_mm, 0.0);
}

TEST(Stats, SummaryAndWilcoxon) {
  const std::vector<double> v{1, 2, 3, 4};
  const Summary s = summarize(v);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.std, std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_EQ(s.min, 1);
  EXPECT_EQ(s.max, 4);
  EXPECT_THROW(summarize(std::vector<double>{}), DataError);

  std::vector<double> x, y;
  for (int i = 1; i <= 10; ++i) {
    x.push_back(i);
    y.push_back(0);
  }
  const WilcoxonResult w = wilcoxon_signed_rank(x, y);
  EXPECT_EQ(w.n, 10u);
  EXPECT_DOUBLE_EQ(w.w_plus, 55.0);
  EXPECT_DOUBLE_EQ(w.w_minus, 0.0);
  EXPECT_NEAR(w.z, 27.0 / std::sqrt(96.25), 1e-12);
  EXPECT_NEAR(w.p_greater, 0.5 * std::erfc(w.z / std::sqrt(2.0)), 1e-12);
  EXPECT_NEAR(w.p_two_sided, 2 * w.p_greater, 1e-12);
  EXPECT_LT(w.p_greater, 0.01);

  const std::vector<double> tx{1, -1, 2, 0}, ty{0, 0, 0, 0};
  const WilcoxonResult t = wilcoxon_signed_rank(tx, ty);
  EXPECT_EQ(t.n, 3u);
  EXPECT_DOUBLE_EQ(t.w_plus, 4.5);
  EXPECT_DOUBLE_EQ(t.w_minus, 1.5);
}

TEST(CrossVal, FoldsPartitionTheData) {
  const auto f = make_folds(10, 2, 7);
  ASSERT_EQ(f.size(), 10u);
  EXPECT_EQ(std::count(f.begin(), f.end(), 0), 5);
  EXPECT_EQ(std::count(f.begin(), f.end(), 1), 5);
  EXPECT_EQ(make_folds(10, 2, 7), f);
  EXPECT_NE(make_folds(10, 2, 8), f);
  const auto g = make_folds(11, 3, 1);
  for (int k = 0; k < 3; ++k) {
    const auto c = std::count(g.begin(), g.end(), k);
    EXPECT_TRUE(c == 3 || c == 4);
  }
  EXPECT_THROW(make_folds(3, 4, 0), DataError);
  EXPECT_THROW(make_folds(3, 1, 0), DataError);
}

TEST(Report, PooledMeanEqualsMeanOfAllImages) {
  EvalReport r;
  const double vals[6] = {0.9, 0.8, 0.95, 0.7, 0.85, 0.99};
  double sum = 0;
  for (int i = 0; i < 6; ++i) {
    ImageResult im;
    im.id = "img" + std::to_string(i);
    im.fold = i < 2 ? 0 : 1;  // unequal folds make the mean of fold means differ
    im.dsc = vals[i];
    im.dsc_by_stage = {vals[i] - 0.1, vals[i]};
    im.space = SpaceErrors{1.0 * i, 1.36 * i, 0.5, 0.01};
    r.images.push_back(im);
    sum += vals[i];
  }
  r.aggregate();
  EXPECT_NEAR(r.aggregates.at("dsc").mean, sum / 6, 1e-15);
  EXPECT_NEAR(r.fold_aggregates.at(0).at("dsc").mean, 0.85, 1e-15);
  EXPECT_EQ(r.fold_aggregates.at(1).at("dsc").count, 4u);
  EXPECT_TRUE(r.aggregates.count("dsc_k1"));
  EXPECT_NEAR(r.aggregates.at("translation_px").mean, 2.5, 1e-15);

  // Aggregates recomputed from the per-image JSON match.
  const nlohmann::json doc = r.to_json();
  double again = 0;
  for (const auto& im : doc.at("images")) again += im.at("dsc").get<double>();
  EXPECT_NEAR(again / doc.at("images").size(), doc.at("aggregates").at("dsc").at("mean").get<double>(), 1e-15);
  EXPECT_NE(r.table().find("fold 1: dsc"), std::string::npos);
}

TEST(Report, SpaceErrors) {
  const shape::Box t{{50, 60}, {100, 80}}, e{{53, 56}, {104, 77}};
  const SpaceErrors s = space_errors(t, 0.1, e, 0.05, {2, 2});
  EXPECT_DOUBLE_EQ(s.translation_px, 5.0);
  EXPECT_DOUBLE_EQ(s.translation_mm, 10.0);
  EXPECT_DOUBLE_EQ(s.scale_px, 3.5);
  EXPECT_NEAR(s.orientation_rad, 0.05, 1e-15);
}

TEST(Report, WritesJsonTableAndOverlay) {
  const auto dir = std::filesystem::temp_directory_path() / "shapeseg_report_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  EvalReport r;
  r.images.push_back(ImageResult{"a", -1, 0.9, 0.8, 1.0, std::nullopt, {}});
  r.aggregate();
  write_report(dir / "rep", r);
  EXPECT_TRUE(std::filesystem::exists(dir / "rep.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "rep.txt"));
  const data::GrayImage img = data::GrayImage::filled(4, 4, 0.5);
  write_overlay_png(dir / "o.png", img, from_indices(4, 4, {0, 1}), from_indices(4, 4, {1, 2}));
  EXPECT_GT(std::filesystem::file_size(dir / "o.png"), 0u);
  std::filesystem::remove_all(dir);
}
