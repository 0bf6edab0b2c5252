#include "shapeseg/eval/crossval.hpp"

#include "shapeseg/common/error.hpp"
#include "shapeseg/common/parallel.hpp"
#include "shapeseg/common/rng.hpp"
#include "shapeseg/eval/metrics.hpp"

#include <chrono>
#include <numeric>

namespace shapeseg::eval {

std::vector<int> make_folds(std::size_t n, int folds, std::uint64_t seed) {
  if (folds < 2) throw DataError("cross-validation needs at least 2 folds");
  if (static_cast<std::size_t>(folds) > n) {
    throw DataError("cannot split " + std::to_string(n) + " samples into " + std::to_string(folds) + " folds");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(mix_seed(seed, "folds"));
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<int> out(n, 0);
  for (std::size_t i = 0; i < n; ++i) out[order[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
  return out;
}

ImageResult score_segmentation(const data::Sample& sample, const pipeline::Segmentation& seg, double truth_theta) {
  if (!sample.landmarks) throw DataError("sample '" + sample.id + "' has no landmarks to score against");
  const auto& img = sample.image;
  ImageResult r;
  r.id = sample.id;
  const ShapeScores s = score_shapes(*sample.landmarks, seg.final_shape(), img.width, img.height, img.spacing);
  r.dsc = s.dsc;
  r.jaccard = s.jaccard;
  r.acd_mm = s.acd_mm;
  const data::Mask gt = data::rasterize_shape(*sample.landmarks, img.width, img.height);
  for (const auto& stage : seg.result.stages) {
    r.dsc_by_stage.push_back(dsc(gt, data::rasterize_shape(stage, img.width, img.height, true)));
  }
  r.space = space_errors(shape::bounding_box(*sample.landmarks), truth_theta, seg.space.box, seg.space.theta,
                         img.spacing);
  return r;
}

CrossValRun crossval(std::span<const data::Sample> samples, const pipeline::RunConfig& cfg,
                     const std::function<void(const std::string&)>& progress) {
  cfg.validate();
  const std::vector<int> fold_of = make_folds(samples.size(), cfg.folds, cfg.seed);
  const std::vector<double> thetas = pipeline::training_orientations(samples);
  using clock = std::chrono::steady_clock;

  CrossValRun run;
  std::vector<ImageResult> results(samples.size());
  for (int f = 0; f < cfg.folds; ++f) {
    std::vector<data::Sample> train;
    std::vector<std::size_t> test;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (fold_of[i] == f) {
        test.push_back(i);
      } else {
        train.push_back(samples[i]);
      }
    }
    pipeline::RunConfig fc = cfg;
    fc.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(f));
    if (progress) progress("fold " + std::to_string(f) + ": training on " + std::to_string(train.size()));
    const auto t0 = clock::now();
    auto sp = pipeline::train_space(train, fc);
    auto sh = pipeline::train_shape(train, fc);
    const auto t1 = clock::now();
    pipeline::TrainingLog log = std::move(sp.log);
    log.append(sh.log);
    run.logs.push_back(std::move(log));
    if (progress) progress("fold " + std::to_string(f) + ": segmenting " + std::to_string(test.size()));
    parallel_for(test.size(), cfg.jobs, [&](std::size_t t) {
      const std::size_t i = test[t];
      const auto seg = pipeline::segment_image(samples[i].image, sp.set, sh.bundle, cfg.modes, 1);
      results[i] = score_segmentation(samples[i], seg, thetas[i]);
      results[i].fold = f;
    });
    run.train_seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
    run.test_seconds.push_back(std::chrono::duration<double>(clock::now() - t1).count());
  }
  run.report.images = std::move(results);
  run.report.folds = fold_of;
  run.report.seed = cfg.seed;
  run.report.config = pipeline::config_to_json(cfg);
  run.report.aggregate();
  return run;
}

}  // namespace shapeseg::eval
