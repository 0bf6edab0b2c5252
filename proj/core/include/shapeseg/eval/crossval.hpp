#pragma once

#include "shapeseg/data/manifest.hpp"
#include "shapeseg/eval/report.hpp"
#include "shapeseg/pipeline/config.hpp"
#include "shapeseg/pipeline/segmenter.hpp"
#include "shapeseg/pipeline/training.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace shapeseg::eval {

/// Fold index per item: a seeded shuffle dealt round-robin, so fold sizes
/// differ by at most one. Throws DataError when folds > n or folds < 2.
std::vector<int> make_folds(std::size_t n, int folds, std::uint64_t seed);

/// Scores one segmentation against the sample's landmarks: DSC, Jaccard and
/// ACD of the final shape, DSC of every stage x_0..x_K, and space errors
/// against the landmark bounding box and the given true orientation.
ImageResult score_segmentation(const data::Sample& sample, const pipeline::Segmentation& seg, double truth_theta);

struct CrossValRun {
  EvalReport report;
  std::vector<pipeline::TrainingLog> logs;  // one per fold
  std::vector<double> train_seconds;        // wall time per fold
  std::vector<double> test_seconds;
};

/// Trains on all folds but one and segments the held-out fold, for every
/// fold. Each round derives its seed from (cfg.seed, fold). `progress`
/// receives short status lines when set.
CrossValRun crossval(std::span<const data::Sample> samples, const pipeline::RunConfig& cfg,
                     const std::function<void(const std::string&)>& progress = {});

}  // namespace shapeseg::eval
