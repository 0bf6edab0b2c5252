#include "shapeseg/eval/report.hpp"

#include "shapeseg/common/error.hpp"
#include "shapeseg/common/json_io.hpp"
#include "shapeseg/data/image_io.hpp"
#include "shapeseg/eval/metrics.hpp"
#include "shapeseg/shape/shape.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace shapeseg::eval {

SpaceErrors space_errors(const shape::Box& truth_box, double truth_theta, const shape::Box& est_box,
                         double est_theta, const Eigen::Vector2d& spacing) {
  SpaceErrors e;
  const Eigen::Vector2d dt = est_box.center - truth_box.center;
  e.translation_px = dt.norm();
  e.translation_mm = dt.cwiseProduct(spacing).norm();
  e.scale_px = 0.5 * (std::abs(est_box.size.x() - truth_box.size.x()) + std::abs(est_box.size.y() - truth_box.size.y()));
  e.orientation_rad = std::abs(shape::wrap_angle(est_theta - truth_theta));
  return e;
}

ShapeScores score_shapes(const shape::Shape& gt, const shape::Shape& pred, int width, int height,
                         const Eigen::Vector2d& spacing) {
  const data::Mask gm = data::rasterize_shape(gt, width, height, true);
  const data::Mask pm = data::rasterize_shape(pred, width, height, true);
  ShapeScores s;
  s.dsc = dsc(gm, pm);
  s.jaccard = jaccard(gm, pm);
  s.acd_mm = acd(contour_from_shape(gt), contour_from_shape(pred), spacing);
  return s;
}

namespace {

nlohmann::json summary_json(const Summary& s) {
  return {{"mean", s.mean}, {"std", s.std}, {"min", s.min}, {"max", s.max}, {"count", s.count}};
}

// Reporting order of the metrics in JSON and table output.
const char* const kMetricOrder[] = {"dsc", "jaccard", "acd_mm", "translation_px", "translation_mm", "scale_px",
                                    "orientation_rad"};

std::map<std::string, Summary> summarize_results(const std::vector<const ImageResult*>& images) {
  std::map<std::string, Summary> out;
  if (images.empty()) return out;
  std::map<std::string, std::vector<double>> cols;
  for (const ImageResult* r : images) {
    cols["dsc"].push_back(r->dsc);
    cols["jaccard"].push_back(r->jaccard);
    cols["acd_mm"].push_back(r->acd_mm);
    if (r->space) {
      cols["translation_px"].push_back(r->space->translation_px);
      cols["translation_mm"].push_back(r->space->translation_mm);
      cols["scale_px"].push_back(r->space->scale_px);
      cols["orientation_rad"].push_back(r->space->orientation_rad);
    }
    for (std::size_t k = 0; k < r->dsc_by_stage.size(); ++k) {
      cols["dsc_k" + std::to_string(k)].push_back(r->dsc_by_stage[k]);
    }
  }
  for (const auto& [name, values] : cols) {
    // Stage columns only make sense when every image recorded them.
    if (values.size() == images.size() || name.rfind("dsc_k", 0) != 0) out[name] = summarize(values);
  }
  return out;
}

}  // namespace

void EvalReport::aggregate() {
  std::vector<const ImageResult*> all;
  std::map<int, std::vector<const ImageResult*>> by_fold;
  for (const auto& r : images) {
    all.push_back(&r);
    if (r.fold >= 0) by_fold[r.fold].push_back(&r);
  }
  aggregates = summarize_results(all);
  fold_aggregates.clear();
  for (const auto& [fold, members] : by_fold) fold_aggregates[fold] = summarize_results(members);
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& r : images) {
    nlohmann::json j = {{"id", r.id}, {"dsc", r.dsc}, {"jaccard", r.jaccard}, {"acd_mm", r.acd_mm}};
    if (r.fold >= 0) j["fold"] = r.fold;
    if (r.space) {
      j["space"] = {{"translation_px", r.space->translation_px},
                    {"translation_mm", r.space->translation_mm},
                    {"scale_px", r.space->scale_px},
                    {"orientation_rad", r.space->orientation_rad}};
    }
    if (!r.dsc_by_stage.empty()) j["dsc_by_stage"] = r.dsc_by_stage;
    per.push_back(std::move(j));
  }
  nlohmann::json agg = nlohmann::json::object();
  for (const auto& [name, s] : aggregates) agg[name] = summary_json(s);
  nlohmann::json doc = {{"version", 1}, {"seed", seed}, {"images", per}, {"aggregates", agg}};
  if (!folds.empty()) doc["folds"] = folds;
  if (!fold_aggregates.empty()) {
    nlohmann::json per_fold = nlohmann::json::object();
    for (const auto& [fold, aggs] : fold_aggregates) {
      nlohmann::json f = nlohmann::json::object();
      for (const auto& [name, s] : aggs) f[name] = summary_json(s);
      per_fold[std::to_string(fold)] = std::move(f);
    }
    doc["fold_aggregates"] = std::move(per_fold);
  }
  if (!config.is_null()) doc["config"] = config;
  return doc;
}

std::string EvalReport::table() const {
  std::vector<std::string> names;
  for (const char* n : kMetricOrder) {
    if (aggregates.count(n)) names.emplace_back(n);
  }
  for (const auto& [name, s] : aggregates) {
    if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
  }
  std::size_t width = 6;
  for (const auto& n : names) width = std::max(width, n.size());
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-*s  %s\n", static_cast<int>(width), "metric", "mean+-std (min/max)");
  out << buf;
  for (const auto& n : names) {
    const Summary& s = aggregates.at(n);
    std::snprintf(buf, sizeof buf, "%-*s  %.4f+-%.4f (%.4f/%.4f)\n", static_cast<int>(width), n.c_str(), s.mean,
                  s.std, s.min, s.max);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "images: %zu\n", images.size());
  out << buf;
  for (const auto& [fold, aggs] : fold_aggregates) {
    const auto it = aggs.find("dsc");
    if (it == aggs.end()) continue;
    std::snprintf(buf, sizeof buf, "fold %d: dsc %.4f+-%.4f over %zu images\n", fold, it->second.mean,
                  it->second.std, it->second.count);
    out << buf;
  }
  return out.str();
}

void write_report(const std::filesystem::path& stem, const EvalReport& report) {
  std::filesystem::path json_path = stem;
  json_path += ".json";
  std::filesystem::path txt_path = stem;
  txt_path += ".txt";
  write_json_file(json_path, report.to_json());
  std::ofstream out(txt_path);
  if (!out) throw DataError("cannot write " + txt_path.string());
  out << report.table();
}

void write_overlay_png(const std::filesystem::path& path, const data::GrayImage& image, const data::Mask& gt,
                       const data::Mask& seg) {
  if (image.width != gt.width || image.height != gt.height || !gt.same_dims(seg)) {
    throw DataError("overlay image and masks differ in size");
  }
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(image.width) * image.height * 3);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const auto g = static_cast<std::uint8_t>(std::lround(std::clamp(image.at(x, y), 0.0, 1.0) * 255.0));
      std::uint8_t px[3] = {g, g, g};
      const bool a = gt.at(x, y), b = seg.at(x, y);
      if (a && b) {
        px[0] = static_cast<std::uint8_t>(g / 2);
        px[1] = static_cast<std::uint8_t>(g / 2);
        px[2] = 255;
      } else if (a) {
        px[0] = static_cast<std::uint8_t>(g / 2);
        px[1] = 255;
        px[2] = static_cast<std::uint8_t>(g / 2);
      } else if (b) {
        px[0] = 255;
        px[1] = static_cast<std::uint8_t>(g / 2);
        px[2] = static_cast<std::uint8_t>(g / 2);
      }
      std::copy(px, px + 3, rgb.begin() + 3 * (static_cast<std::ptrdiff_t>(y) * image.width + x));
    }
  }
  data::write_png_rgb(path, image.width, image.height, rgb);
}

}  // namespace shapeseg::eval
