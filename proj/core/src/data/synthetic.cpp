#include "shapeseg/data/synthetic.hpp"

#include "shapeseg/common/error.hpp"
#include "shapeseg/common/json_io.hpp"
#include "shapeseg/common/parallel.hpp"
#include "shapeseg/common/rng.hpp"
#include "shapeseg/data/image_io.hpp"
#include "shapeseg/data/raster.hpp"
#include "shapeseg/shape/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

namespace shapeseg::data {

using shape::Point;

void SyntheticSpec::validate() const {
  if (count < 1) throw DataError("synthetic count must be at least 1");
  if (width < 16 || height < 16) throw DataError("synthetic images must be at least 16x16");
  if (landmarks_per_side < 4) throw DataError("need at least 4 landmarks per side");
  if (!(group1_fraction >= 0.0 && group1_fraction <= 1.0)) throw DataError("group1_fraction must lie in [0, 1]");
  for (std::size_t j = 0; j < mode_rms.size(); ++j) {
    if (!(mode_rms[j] > 0.0)) throw DataError("mode_rms entries must be positive");
    if (j > 0 && mode_rms[j] > mode_rms[j - 1]) throw DataError("mode_rms must be descending");
  }
  if (mode_rms.size() > 8) throw DataError("at most 8 generating modes are available");
  if (static_cast<int>(mode_rms.size()) > 2 * landmarks_per_side - 4) throw DataError("too many modes for M");
  if (!(scale_min > 0.0 && scale_max >= scale_min)) throw DataError("invalid scale range");
  if (!(anisotropy >= 0.0 && anisotropy < 1.0)) throw DataError("anisotropy must lie in [0, 1)");
  if (!(theta_max >= 0.0 && theta_max < std::numbers::pi / 2)) throw DataError("theta_max must lie in [0, pi/2)");
  if (!(translation_jitter >= 0.0) || !(margin >= 0.0)) throw DataError("invalid translation jitter or margin");
  if (!(blur_sigma >= 0.0) || !(noise_sigma >= 0.0) || !(texture >= 0.0)) throw DataError("invalid noise settings");
  for (double level : {foreground, background, mediastinum}) {
    if (!(level >= 0.0 && level < 1.0)) throw DataError("synthetic intensity levels must lie in [0, 1)");
  }
  if (!(spacing > 0.0)) throw DataError("spacing must be positive");
  if (bit_depth < 1 || bit_depth > 16) throw DataError("bit depth must lie in [1, 16]");
  if (max_attempts < 1) throw DataError("max_attempts must be positive");
  for (const auto& g : groups) {
    if (!(g.half_width > 0.0 && g.half_height > 0.0 && g.offset >= 0.0 && std::abs(g.taper) < 1.0)) {
      throw DataError("invalid lobe family");
    }
  }
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct LobeSample {
  Point p;
  Point normal;  // outward unit normal
};

// Side 0 is the image-left lobe traced clockwise (on screen) from its top
// landmark; side 1 is its mirror image, i.e. counter-clockwise.
LobeSample lobe_point(const LobeFamily& f, int side, double t) {
  const double sx = side == 0 ? 1.0 : -1.0;
  const double cx = side == 0 ? -f.offset : f.offset;
  const double st = std::sin(t), ct = std::cos(t);
  const Point p{cx + sx * f.half_width * st * (1.0 - f.taper * ct), -f.half_height * ct};
  const Point d{sx * f.half_width * (ct * (1.0 - f.taper * ct) + f.taper * st * st), f.half_height * st};
  Point n{d.y(), -d.x()};
  n.normalize();
  if (n.dot(p - Point{cx, 0.0}) < 0.0) n = -n;
  return {p, n};
}

// Low-order normal perturbations; "+" fields move both lobes as mirror
// images, "-" fields move them in opposition.
struct Field {
  bool symmetric;
  int order;
  bool use_sin;
};
// The dominant modes barely move the bounding-box aspect ratio, so the two
// lobe families stay apart, and do not mimic a rotation (the antisymmetric
// first-order field shifts one lobe up and the other down).
constexpr Field kFields[] = {{false, 3, false}, {false, 2, false}, {true, 2, true},  {true, 3, false},
                             {true, 4, false},  {true, 1, true},   {false, 1, false}, {true, 2, false}};

double gaussian_kernel_value(double x, double sigma) { return std::exp(-0.5 * x * x / (sigma * sigma)); }

std::vector<double> blur_separable(const std::vector<double>& src, int w, int h, double sigma) {
  if (sigma <= 0.0) return src;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) sum += k[static_cast<std::size_t>(i + radius)] = gaussian_kernel_value(i, sigma);
  for (auto& v : k) v /= sum;
  std::vector<double> tmp(src.size()), out(src.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        acc += k[static_cast<std::size_t>(i + radius)] * src[static_cast<std::size_t>(y) * w + std::clamp(x + i, 0, w - 1)];
      }
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        acc += k[static_cast<std::size_t>(i + radius)] * tmp[static_cast<std::size_t>(std::clamp(y + i, 0, h - 1)) * w + x];
      }
      out[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  return out;
}

struct Wave {
  double fx, fy, phase, amp;
};

std::vector<Wave> draw_waves(Rng& rng, int count) {
  std::vector<Wave> waves(static_cast<std::size_t>(count));
  double total = 0.0;
  for (auto& w : waves) {
    w.fx = rng.uniform(-5.0, 5.0);
    w.fy = rng.uniform(-5.0, 5.0);
    w.phase = rng.uniform(0.0, kTwoPi);
    w.amp = rng.uniform(0.3, 1.0);
    total += w.amp;
  }
  for (auto& w : waves) w.amp /= total;
  return waves;
}

double eval_waves(const std::vector<Wave>& waves, double u, double v) {
  double s = 0.0;
  for (const auto& w : waves) s += w.amp * std::sin(kTwoPi * (w.fx * u + w.fy * v) + w.phase);
  return s;
}

bool sides_are_simple(const shape::Shape& s) {
  for (int side = 0; side < s.sides(); ++side) {
    const auto pts = s.side_points(side);
    if (polygon_self_intersects(pts)) return false;
  }
  return true;
}

std::string case_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "case_%04d", index);
  return buf;
}

}  // namespace

shape::ShapeModel synthetic_group_model(const SyntheticSpec& spec, int group) {
  spec.validate();
  if (group < 0 || group > 1) throw DataError("synthetic group must be 0 or 1");
  const LobeFamily& f = spec.groups[static_cast<std::size_t>(group)];
  const int n = spec.landmarks_per_side;
  const Eigen::Index m = 2 * n;
  Eigen::VectorXd mean(2 * m);
  std::vector<LobeSample> samples;
  for (int side = 0; side < 2; ++side) {
    for (int j = 0; j < n; ++j) {
      const LobeSample s = lobe_point(f, side, kTwoPi * j / n);
      mean(2 * (side * n + j)) = s.p.x();
      mean(2 * (side * n + j) + 1) = s.p.y();
      samples.push_back(s);
    }
  }
  const auto k = static_cast<Eigen::Index>(spec.mode_rms.size());
  Eigen::MatrixXd modes(2 * m, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const Field& fd = kFields[c];
    Eigen::VectorXd v(2 * m);
    for (int side = 0; side < 2; ++side) {
      const double sign = (side == 1 && !fd.symmetric) ? -1.0 : 1.0;
      for (int j = 0; j < n; ++j) {
        const double t = kTwoPi * j / n;
        const double g = fd.use_sin ? std::sin(fd.order * t) : std::cos(fd.order * t);
        const Point d = sign * g * samples[static_cast<std::size_t>(side * n + j)].normal;
        v(2 * (side * n + j)) = d.x();
        v(2 * (side * n + j) + 1) = d.y();
      }
    }
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index o = 0; o < c; ++o) v -= modes.col(o).dot(v) * modes.col(o);
    }
    modes.col(c) = v.normalized();
  }
  shape::ShapeModel model;
  model.mean = mean;
  model.eigvecs = modes;
  model.eigvals.resize(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const double rms = spec.mode_rms[static_cast<std::size_t>(c)];
    model.eigvals(c) = rms * rms * static_cast<double>(m);
  }
  model.energy_fraction = 1.0;
  model.group_id = group;
  model.sides = 2;
  model.validate();
  return model;
}

GrayImage render_shape_image(const SyntheticSpec& spec, const shape::Shape& shape, std::uint64_t seed) {
  const int w = spec.width, h = spec.height;
  // Coverage from a 2x supersampled fill: fine pixel i has its center at
  // coarse coordinate (i - 0.5) / 2.
  Eigen::VectorXd fine = 2.0 * shape.coords();
  fine.array() += 0.5;
  const shape::Shape fine_shape(fine, shape.sides());
  const Mask hi = rasterize_shape(fine_shape, 2 * w, 2 * h);
  // Rows crossing both lobes get a mid-level fill between them, so the inner
  // lobe edges do not look like the outer ones.
  Mask gap{2 * w, 2 * h, std::vector<std::uint8_t>(hi.values.size(), 0)};
  if (shape.sides() == 2) {
    const auto left_pts = fine_shape.side_points(0);
    const auto right_pts = fine_shape.side_points(1);
    const Mask left = rasterize_polygon(left_pts, 2 * w, 2 * h);
    const Mask right = rasterize_polygon(right_pts, 2 * w, 2 * h);
    for (int y = 0; y < 2 * h; ++y) {
      int l_max = -1, r_min = 2 * w;
      for (int x = 0; x < 2 * w; ++x) {
        if (left.at(x, y)) l_max = std::max(l_max, x);
        if (right.at(x, y)) r_min = std::min(r_min, x);
      }
      if (l_max < 0 || r_min >= 2 * w) continue;
      for (int x = l_max + 1; x < r_min; ++x) gap.set(x, y, 1);
    }
  }

  Rng rng(seed);
  const auto bg_waves = draw_waves(rng, 5);
  const auto fg_waves = draw_waves(rng, 3);
  const double bg_level = spec.background + rng.uniform(-0.03, 0.03);
  const double fg_level = spec.foreground + rng.uniform(-0.03, 0.03);
  const double gap_level = spec.mediastinum + rng.uniform(-0.03, 0.03);
  std::vector<double> raw(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double u = static_cast<double>(x) / w, v = static_cast<double>(y) / h;
      const int cover = hi.at(2 * x, 2 * y) + hi.at(2 * x + 1, 2 * y) + hi.at(2 * x, 2 * y + 1) +
                        hi.at(2 * x + 1, 2 * y + 1);
      const int between = gap.at(2 * x, 2 * y) + gap.at(2 * x + 1, 2 * y) + gap.at(2 * x, 2 * y + 1) +
                          gap.at(2 * x + 1, 2 * y + 1);
      const double c = cover / 4.0, m = between / 4.0;
      const double bg = bg_level + spec.texture * eval_waves(bg_waves, u, v);
      const double fg = fg_level + 0.5 * spec.texture * eval_waves(fg_waves, u, v);
      const double md = gap_level + 0.5 * spec.texture * eval_waves(bg_waves, u, v);
      raw[static_cast<std::size_t>(y) * w + x] = (1.0 - c - m) * bg + c * fg + m * md;
    }
  }
  raw = blur_separable(raw, w, h, spec.blur_sigma);
  const double levels = std::ldexp(1.0, spec.bit_depth);
  GrayImage img = GrayImage::filled(w, h, 0.0);
  img.spacing = {spec.spacing, spec.spacing};
  img.bit_depth_source = spec.bit_depth;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double v = raw[i] + spec.noise_sigma * rng.normal();
    // Quantized exactly as the written file will be.
    img.pixels[i] = std::clamp(std::round(v * levels), 0.0, levels - 1.0) / levels;
  }
  return img;
}

SyntheticSample generate_synthetic_sample(const SyntheticSpec& spec, int index) {
  spec.validate();
  const std::uint64_t case_seed = mix_seed(spec.seed, static_cast<std::uint64_t>(index));
  Rng rng(case_seed);
  const int group = rng.uniform() < spec.group1_fraction ? 1 : 0;
  const shape::ShapeModel model = synthetic_group_model(spec, group);
  const double extent = std::min(spec.width, spec.height);
  for (int attempt = 0; attempt < spec.max_attempts; ++attempt) {
    Eigen::VectorXd b(model.modes());
    for (Eigen::Index k = 0; k < model.modes(); ++k) b(k) = rng.normal(0.0, std::sqrt(model.eigvals(k)));
    b = shape::clamp_weights({b}, model.eigvals).b;
    const double s = extent * rng.uniform(spec.scale_min, spec.scale_max);
    const double e = rng.uniform(-spec.anisotropy, spec.anisotropy);
    shape::SpaceParams sp;
    sp.scale = {s * (1.0 + e), s * (1.0 - e)};
    sp.theta = rng.uniform(-spec.theta_max, spec.theta_max);
    sp.translation = {0.5 * (spec.width - 1) + spec.width * rng.uniform(-spec.translation_jitter, spec.translation_jitter),
                      0.5 * (spec.height - 1) +
                          spec.height * rng.uniform(-spec.translation_jitter, spec.translation_jitter)};
    const shape::Shape landmarks = shape::synthesize_shape(model, {b}, sp);
    const shape::Box box = shape::bounding_box(landmarks);
    const Point lo = box.center - 0.5 * box.size, hi = box.center + 0.5 * box.size;
    if (lo.x() < spec.margin || lo.y() < spec.margin || hi.x() > spec.width - 1 - spec.margin ||
        hi.y() > spec.height - 1 - spec.margin) {
      continue;
    }
    if (!sides_are_simple(landmarks)) continue;
    SyntheticSample out;
    out.landmarks = landmarks;
    out.truth = {group, sp, b, box};
    out.image = render_shape_image(spec, landmarks, mix_seed(case_seed, "render"));
    return out;
  }
  throw DataError("synthetic case " + std::to_string(index) + ": no feasible draw in " +
                  std::to_string(spec.max_attempts) + " attempts (shape leaves the image or self-intersects)");
}

std::vector<SyntheticSample> generate_synthetic_dataset(const SyntheticSpec& spec, int jobs) {
  spec.validate();
  std::vector<SyntheticSample> out(static_cast<std::size_t>(spec.count));
  parallel_for(out.size(), jobs, [&](std::size_t i) { out[i] = generate_synthetic_sample(spec, static_cast<int>(i)); });
  return out;
}

nlohmann::json synthetic_spec_to_json(const SyntheticSpec& spec) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : spec.groups) {
    groups.push_back({{"half_width", g.half_width},
                      {"half_height", g.half_height},
                      {"offset", g.offset},
                      {"taper", g.taper}});
  }
  return {{"count", spec.count},
          {"width", spec.width},
          {"height", spec.height},
          {"landmarks_per_side", spec.landmarks_per_side},
          {"groups", groups},
          {"group1_fraction", spec.group1_fraction},
          {"mode_rms", spec.mode_rms},
          {"scale_min", spec.scale_min},
          {"scale_max", spec.scale_max},
          {"anisotropy", spec.anisotropy},
          {"theta_max", spec.theta_max},
          {"translation_jitter", spec.translation_jitter},
          {"margin", spec.margin},
          {"foreground", spec.foreground},
          {"background", spec.background},
          {"mediastinum", spec.mediastinum},
          {"texture", spec.texture},
          {"blur_sigma", spec.blur_sigma},
          {"noise_sigma", spec.noise_sigma},
          {"spacing", spec.spacing},
          {"bit_depth", spec.bit_depth},
          {"seed", spec.seed},
          {"max_attempts", spec.max_attempts}};
}

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& doc, SyntheticSpec s) {
  try {
    s.count = doc.value("count", s.count);
    s.width = doc.value("width", s.width);
    s.height = doc.value("height", s.height);
    s.landmarks_per_side = doc.value("landmarks_per_side", s.landmarks_per_side);
    if (doc.contains("groups")) {
      const auto& g = doc.at("groups");
      if (!g.is_array() || g.size() != 2) throw DataError("synthetic groups must list two lobe families");
      for (std::size_t i = 0; i < 2; ++i) {
        auto& f = s.groups[i];
        f.half_width = g[i].value("half_width", f.half_width);
        f.half_height = g[i].value("half_height", f.half_height);
        f.offset = g[i].value("offset", f.offset);
        f.taper = g[i].value("taper", f.taper);
      }
    }
    s.group1_fraction = doc.value("group1_fraction", s.group1_fraction);
    s.mode_rms = doc.value("mode_rms", s.mode_rms);
    s.scale_min = doc.value("scale_min", s.scale_min);
    s.scale_max = doc.value("scale_max", s.scale_max);
    s.anisotropy = doc.value("anisotropy", s.anisotropy);
    s.theta_max = doc.value("theta_max", s.theta_max);
    s.translation_jitter = doc.value("translation_jitter", s.translation_jitter);
    s.margin = doc.value("margin", s.margin);
    s.foreground = doc.value("foreground", s.foreground);
    s.background = doc.value("background", s.background);
    s.mediastinum = doc.value("mediastinum", s.mediastinum);
    s.texture = doc.value("texture", s.texture);
    s.blur_sigma = doc.value("blur_sigma", s.blur_sigma);
    s.noise_sigma = doc.value("noise_sigma", s.noise_sigma);
    s.spacing = doc.value("spacing", s.spacing);
    s.bit_depth = doc.value("bit_depth", s.bit_depth);
    s.seed = doc.value("seed", s.seed);
    s.max_attempts = doc.value("max_attempts", s.max_attempts);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed synthetic spec: ") + e.what());
  }
  return s;
}

std::filesystem::path write_synthetic_dataset(const std::filesystem::path& dir, const SyntheticSpec& spec, int jobs) {
  spec.validate();
  namespace fs = std::filesystem;
  fs::create_directories(dir / "images");
  fs::create_directories(dir / "landmarks");
  fs::create_directories(dir / "truth");
  for (int g = 0; g < 2; ++g) {
    shape::save_shape_model(dir / "truth" / ("model_g" + std::to_string(g) + ".json"), synthetic_group_model(spec, g));
  }
  std::vector<nlohmann::json> entries(static_cast<std::size_t>(spec.count));
  parallel_for(entries.size(), jobs, [&](std::size_t i) {
    const int index = static_cast<int>(i);
    const SyntheticSample sample = generate_synthetic_sample(spec, index);
    const std::string name = case_name(index);
    const std::string image_rel = "images/" + name + ".pgm";
    const std::string landmark_rel = "landmarks/" + name + ".json";
    const std::string truth_rel = "truth/" + name + ".json";
    const std::string model_rel = "truth/model_g" + std::to_string(sample.truth.group) + ".json";
    write_pgm(dir / image_rel, quantize(sample.image, spec.bit_depth));

    shape::LandmarkRecord rec;
    rec.image_path = image_rel;
    rec.group = sample.truth.group;
    rec.landmarks = sample.landmarks;
    const int n = spec.landmarks_per_side;
    for (int side = 0; side < 2; ++side) {
      for (int j = 0; j < 6 && j < n; ++j) rec.primary.push_back(sample.landmarks.point(side * n + j * n / 6));
    }
    shape::save_landmarks(dir / landmark_rel, rec);

    const Eigen::VectorXd& b = sample.truth.weights;
    nlohmann::json truth = {{"space_params", shape::space_params_to_json(sample.truth.space)},
                            {"shape_weights", std::vector<double>(b.data(), b.data() + b.size())},
                            {"model_ref", model_rel},
                            {"group", sample.truth.group},
                            {"theta", sample.truth.space.theta},
                            {"box", shape::box_to_json(sample.truth.box)}};
    write_json_file(dir / truth_rel, truth);
    entries[i] = {{"image_path", image_rel},
                  {"landmark_path", landmark_rel},
                  {"truth_path", truth_rel},
                  {"group", sample.truth.group},
                  {"spacing", {spec.spacing, spec.spacing}}};
  });
  nlohmann::json manifest = {{"version", 1},
                             {"bit_depth", spec.bit_depth},
                             {"target_dims", {spec.width, spec.height}},
                             {"seed", spec.seed},
                             {"landmark_count", 2 * spec.landmarks_per_side},
                             {"sides", 2},
                             {"synthetic_spec", synthetic_spec_to_json(spec)},
                             {"entries", entries}};
  const fs::path path = dir / "manifest.json";
  write_json_file(path, manifest);
  return path;
}

}  // namespace shapeseg::data
