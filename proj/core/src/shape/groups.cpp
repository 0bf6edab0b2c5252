#include "shapeseg/shape/groups.hpp"

#include "shapeseg/common/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace shapeseg::shape {
namespace {

double log_weighted_density(double x, double weight, double mean, double stddev) {
  const double z = (x - mean) / stddev;
  return std::log(weight) - std::log(stddev) - 0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * z * z;
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

std::optional<GroupSplit> cluster_aspect_ratios(std::span<const double> ratios,
                                                std::optional<double> fixed_threshold) {
  if (ratios.size() < 4) throw DataError("aspect-ratio clustering needs at least four shapes");
  for (double r : ratios) {
    if (!std::isfinite(r) || r <= 0.0) throw DataError("aspect ratios must be positive and finite");
  }
  const auto [lo_it, hi_it] = std::minmax_element(ratios.begin(), ratios.end());
  if (*lo_it == *hi_it) return std::nullopt;

  GroupSplit split;
  if (fixed_threshold) {
    split.threshold = *fixed_threshold;
  } else {
    const std::vector<double> values(ratios.begin(), ratios.end());
    const double n = static_cast<double>(values.size());
    double total_mean = 0.0;
    for (double v : values) total_mean += v;
    total_mean /= n;
    double total_var = 0.0;
    for (double v : values) total_var += (v - total_mean) * (v - total_mean);
    total_var /= n;
    const double var_floor = 1e-6 * total_var + 1e-12;

    std::array<double, 2> mu{quantile(values, 0.25), quantile(values, 0.75)};
    std::array<double, 2> var{total_var / 4.0, total_var / 4.0};
    std::array<double, 2> w{0.5, 0.5};
    if (mu[0] == mu[1]) {
      mu[0] = *lo_it;
      mu[1] = *hi_it;
    }
    std::vector<double> resp(values.size());
    double prev_ll = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < 500; ++it) {
      double ll = 0.0;
      for (std::size_t i = 0; i < values.size(); ++i) {
        const double a = log_weighted_density(values[i], w[0], mu[0], std::sqrt(var[0]));
        const double b = log_weighted_density(values[i], w[1], mu[1], std::sqrt(var[1]));
        const double m = std::max(a, b);
        const double lse = m + std::log(std::exp(a - m) + std::exp(b - m));
        resp[i] = std::exp(b - lse);  // posterior of component 1
        ll += lse;
      }
      std::array<double, 2> nk{0.0, 0.0}, sum{0.0, 0.0};
      for (std::size_t i = 0; i < values.size(); ++i) {
        nk[0] += 1.0 - resp[i];
        nk[1] += resp[i];
        sum[0] += (1.0 - resp[i]) * values[i];
        sum[1] += resp[i] * values[i];
      }
      if (nk[0] < 1e-9 || nk[1] < 1e-9) break;
      for (int k = 0; k < 2; ++k) mu[k] = sum[k] / nk[k];
      std::array<double, 2> sq{0.0, 0.0};
      for (std::size_t i = 0; i < values.size(); ++i) {
        sq[0] += (1.0 - resp[i]) * (values[i] - mu[0]) * (values[i] - mu[0]);
        sq[1] += resp[i] * (values[i] - mu[1]) * (values[i] - mu[1]);
      }
      for (int k = 0; k < 2; ++k) {
        var[k] = std::max(sq[k] / nk[k], var_floor);
        w[k] = nk[k] / n;
      }
      if (std::abs(ll - prev_ll) < 1e-12 * (1.0 + std::abs(ll))) break;
      prev_ll = ll;
    }
    if (mu[0] > mu[1]) {
      std::swap(mu[0], mu[1]);
      std::swap(var[0], var[1]);
      std::swap(w[0], w[1]);
    }
    // Equal-posterior point between the means, by bisection on the log ratio.
    auto f = [&](double x) {
      return log_weighted_density(x, w[0], mu[0], std::sqrt(var[0])) -
             log_weighted_density(x, w[1], mu[1], std::sqrt(var[1]));
    };
    double a = mu[0], b = mu[1];
    if (f(a) > 0.0 && f(b) < 0.0) {
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a + b);
        (f(mid) > 0.0 ? a : b) = mid;
      }
      split.threshold = 0.5 * (a + b);
    } else {
      split.threshold = 0.5 * (mu[0] + mu[1]);
    }
    split.fitted = true;
    split.means = mu;
    split.stddevs = {std::sqrt(var[0]), std::sqrt(var[1])};
    split.weights = w;
  }
  split.assignments.reserve(ratios.size());
  for (double r : ratios) split.assignments.push_back(split.group_of(r));
  return split;
}

const ShapeModel& select_model(double aspect_ratio, const GroupSplit& split, std::span<const ShapeModel> models) {
  const int group = split.group_of(aspect_ratio);
  for (const auto& m : models) {
    if (m.group_id == group) return m;
  }
  throw DataError("no shape model for group " + std::to_string(group));
}

}  // namespace shapeseg::shape
