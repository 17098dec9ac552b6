#pragma once

#include <span>
#include <string>
#include <vector>

#include "commgen/common.hpp"

namespace commgen::stats {

enum class Direction { positive, negative, zero };

struct TestResult {
  double statistic = 0;
  double p_value = 1;
  double corrected_p = 1;  // equals p_value until a correction is applied
  Direction direction = Direction::zero;
};

// Welch two-sample t test, two-sided. Each sample needs >= 2 values.
TestResult t_test(std::span<const double> a, std::span<const double> b);

// Pearson correlation with a two-sided p from the t transform (n - 2 df).
// Throws on zero variance.
TestResult pearson(std::span<const double> x, std::span<const double> y);

// Paired Wilcoxon signed rank. Zero differences are dropped; ties get average
// ranks. Exact distribution (over sign assignments of the observed ranks) up
// to n = 25, normal approximation with tie correction beyond. All-zero
// differences give p = 1.
TestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

// p -> min(1, m * p). Requires m >= p_values.size() and p values in [0,1].
std::vector<double> bonferroni(std::span<const double> p_values, std::size_t m);

// Arrow notation: 4 arrows for p < 0.0001 down to 1 for p < 0.05, "------"
// otherwise. Direction picks the arrow glyph.
std::string significance_arrows(double corrected_p, Direction direction);

// Shared numeric kernels (exposed for verification).
double regularized_incomplete_beta(double x, double a, double b);
double student_t_two_sided_p(double t, double df);

}  // namespace commgen::stats
