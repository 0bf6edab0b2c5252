#include "shapeseg/common/rng.hpp"
#include "shapeseg/data/raster.hpp"
#include "shapeseg/eval/metrics.hpp"
#include "shapeseg/nn/classifier.hpp"
#include "shapeseg/nn/network.hpp"
#include "shapeseg/shape/procrustes.hpp"
#include "shapeseg/space/line.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

using namespace shapeseg;

namespace {

nn::NetworkModel random_net(std::vector<Eigen::Index> dims, std::uint64_t seed) {
  Rng rng(seed);
  nn::NetworkModel m;
  m.layer_dims = dims;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    Eigen::MatrixXd w(dims[i + 1], dims[i]);
    for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = rng.uniform(-0.1, 0.1);
    m.weights.push_back(w);
    m.biases.push_back(Eigen::VectorXd::Zero(dims[i + 1]));
  }
  return m;
}

data::GrayImage noise_image(int side) {
  Rng rng(3);
  data::GrayImage img = data::GrayImage::filled(side, side, 0.0);
  for (auto& v : img.pixels) v = rng.uniform();
  return img;
}

shape::Shape ellipse(int m, double cx, double cy, double rx, double ry) {
  Eigen::VectorXd v(2 * m);
  for (int i = 0; i < m; ++i) {
    const double t = 2 * std::numbers::pi * i / m;
    v(2 * i) = cx + rx * std::cos(t);
    v(2 * i + 1) = cy + ry * std::sin(t);
  }
  return shape::Shape(v);
}

}  // namespace

static void BM_ScoreBatch(benchmark::State& state) {
  const auto in = static_cast<Eigen::Index>(state.range(0));
  const nn::NetworkModel m = random_net({in, 64, 32, 1}, 1);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(in, 256);
  for (auto _ : state) benchmark::DoNotOptimize(nn::score_batch(m, x));
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_ScoreBatch)->Arg(256 * 15)->Arg(32 * 81);

static void BM_DetectLine(benchmark::State& state) {
  const data::GrayImage img = noise_image(256);
  const nn::NetworkModel m = random_net({256 * 15, 64, 32, 1}, 2);
  const nn::CandidateScorer scorer = nn::network_scorer(m);
  for (auto _ : state) benchmark::DoNotOptimize(space::detect_line(scorer, img, 1, 7, 10));
}
BENCHMARK(BM_DetectLine)->Unit(benchmark::kMillisecond);

static void BM_Procrustes(benchmark::State& state) {
  Rng rng(4);
  std::vector<shape::Shape> shapes;
  for (int i = 0; i < state.range(0); ++i) {
    shape::Shape s = ellipse(32, 128, 128, 60 + rng.normal() * 4, 80 + rng.normal() * 4);
    const shape::Similarity t{rng.uniform(0.8, 1.2), rng.uniform(-0.2, 0.2), {rng.normal() * 5, rng.normal() * 5}};
    shapes.push_back(t.apply(s));
  }
  for (auto _ : state) benchmark::DoNotOptimize(shape::procrustes_align(shapes));
}
BENCHMARK(BM_Procrustes)->Arg(50)->Arg(200);

static void BM_Rasterize(benchmark::State& state) {
  const shape::Shape s = ellipse(64, 128, 128, 70, 100);
  for (auto _ : state) benchmark::DoNotOptimize(data::rasterize_shape(s, 256, 256));
}
BENCHMARK(BM_Rasterize);

static void BM_OverlapMetrics(benchmark::State& state) {
  const data::Mask a = data::rasterize_shape(ellipse(64, 128, 128, 70, 100), 256, 256);
  const data::Mask b = data::rasterize_shape(ellipse(64, 131, 126, 68, 103), 256, 256);
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval::dsc(a, b));
    benchmark::DoNotOptimize(eval::jaccard(a, b));
  }
}
BENCHMARK(BM_OverlapMetrics);

static void BM_AcdMasks(benchmark::State& state) {
  const data::Mask a = data::rasterize_shape(ellipse(64, 128, 128, 70, 100), 256, 256);
  const data::Mask b = data::rasterize_shape(ellipse(64, 131, 126, 68, 103), 256, 256);
  for (auto _ : state) benchmark::DoNotOptimize(eval::acd_masks(a, b, {1.36, 1.36}));
}
BENCHMARK(BM_AcdMasks)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
