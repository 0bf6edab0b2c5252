#pragma once

#include <span>

namespace shapeseg::eval {

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (0 for a single value)
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

/// Throws DataError for an empty sample.
Summary summarize(std::span<const double> values);

struct WilcoxonResult {
  double w_plus = 0.0;   // rank sum of positive differences
  double w_minus = 0.0;
  std::size_t n = 0;     // non-zero differences
  double z = 0.0;        // continuity-corrected normal statistic (sign of w_plus - mean)
  double p_two_sided = 1.0;
  double p_greater = 1.0;  // alternative: x tends to exceed y
};

/// Paired signed-rank test of x - y. Zero differences are dropped, tied
/// magnitudes get average ranks and the variance is tie-corrected; the
/// p-values use the normal approximation.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y);

}  // namespace shapeseg::eval
