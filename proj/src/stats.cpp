#include "commgen/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace commgen::stats {

namespace {

double mean_of(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_var(std::span<const double> v, double mean) {
  double s = 0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size() - 1);
}

Direction direction_of(double signed_value) {
  if (signed_value > 0) return Direction::positive;
  if (signed_value < 0) return Direction::negative;
  return Direction::zero;
}

// Continued fraction for the regularized incomplete beta (modified Lentz).
double betacf(double x, double a, double b) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  double qab = a + b, qap = a + 1, qam = a - 1;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 500; ++m) {
    double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double x, double a, double b) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                    a * std::log(x) + b * std::log1p(-x);
  double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(x, a, b) / a;
  return 1.0 - front * betacf(1.0 - x, b, a) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (!std::isfinite(t)) return 0.0;
  if (t == 0.0) return 1.0;
  // Two-sided tail mass via the standard beta identity.
  double x = df / (df + t * t);
  return regularized_incomplete_beta(x, df / 2.0, 0.5);
}

TestResult t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw UserError("t test needs >= 2 values per sample");
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double ma = mean_of(a), mb = mean_of(b);
  const double va = sample_var(a, ma), vb = sample_var(b, mb);

  TestResult r;
  const double sa = va / na, sb = vb / nb;
  if (sa + sb == 0.0) {
    if (ma == mb) return r;  // statistic 0, p 1
    r.statistic = ma > mb ? std::numeric_limits<double>::infinity()
                          : -std::numeric_limits<double>::infinity();
    r.p_value = r.corrected_p = 0.0;
    r.direction = direction_of(ma - mb);
    return r;
  }
  r.statistic = (ma - mb) / std::sqrt(sa + sb);
  double df = (sa + sb) * (sa + sb) / (sa * sa / (na - 1) + sb * sb / (nb - 1));
  r.p_value = r.corrected_p = student_t_two_sided_p(r.statistic, df);
  r.direction = direction_of(r.statistic);
  return r;
}

TestResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw UserError("pearson: samples must have equal length");
  if (x.size() < 3) throw UserError("pearson needs at least 3 pairs");
  const double n = static_cast<double>(x.size());
  const double mx = mean_of(x), my = mean_of(y);
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0)
    throw UserError("pearson: correlation undefined for zero-variance sample");

  TestResult r;
  r.statistic = sxy / std::sqrt(sxx * syy);
  r.direction = direction_of(r.statistic);
  double one_minus_r2 = 1.0 - r.statistic * r.statistic;
  if (one_minus_r2 <= 0.0) {
    r.p_value = r.corrected_p = 0.0;
    return r;
  }
  double t = r.statistic * std::sqrt((n - 2.0) / one_minus_r2);
  r.p_value = r.corrected_p = student_t_two_sided_p(t, n - 2.0);
  return r;
}

TestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw UserError("wilcoxon: samples must have equal length");
  std::vector<double> diffs;
  diffs.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    if (d != 0.0) diffs.push_back(d);
  }
  TestResult r;
  if (diffs.empty()) return r;  // no signal: statistic 0, p 1
  const std::size_t n = diffs.size();
  if (n < 5) throw UserError("wilcoxon needs >= 5 nonzero differences");

  // Average ranks of |d|, doubled so tied ranks stay integral.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return std::fabs(diffs[i]) < std::fabs(diffs[j]);
  });
  std::vector<std::int64_t> rank2(n);  // 2 * average rank
  std::vector<std::int64_t> tie_sizes;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && std::fabs(diffs[order[j]]) == std::fabs(diffs[order[i]])) ++j;
    std::int64_t dbl = static_cast<std::int64_t>(i + 1 + j);  // 2*avg of ranks i+1..j
    for (std::size_t t = i; t < j; ++t) rank2[order[t]] = dbl;
    tie_sizes.push_back(static_cast<std::int64_t>(j - i));
    i = j;
  }

  std::int64_t w_plus2 = 0;  // 2 * W+
  for (std::size_t i = 0; i < n; ++i)
    if (diffs[i] > 0) w_plus2 += rank2[i];
  const double w_plus = static_cast<double>(w_plus2) / 2.0;
  const double mean_w = static_cast<double>(n) * (n + 1) / 4.0;
  r.statistic = w_plus;
  r.direction = direction_of(w_plus - mean_w);

  if (n <= 25) {
    // Exact null distribution of 2*W+ over all sign assignments, by counting
    // subset sums of the doubled ranks.
    std::int64_t max_sum = 0;
    for (std::size_t i = 0; i < n; ++i) max_sum += rank2[i];
    std::vector<std::uint64_t> ways(static_cast<std::size_t>(max_sum) + 1, 0);
    ways[0] = 1;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::int64_t s = max_sum; s >= rank2[i]; --s)
        ways[static_cast<std::size_t>(s)] += ways[static_cast<std::size_t>(s - rank2[i])];
    }
    std::uint64_t le = 0, ge = 0;
    for (std::int64_t s = 0; s <= max_sum; ++s) {
      if (s <= w_plus2) le += ways[static_cast<std::size_t>(s)];
      if (s >= w_plus2) ge += ways[static_cast<std::size_t>(s)];
    }
    const double denom = std::ldexp(1.0, static_cast<int>(n));  // 2^n
    double p = 2.0 * std::min(static_cast<double>(le), static_cast<double>(ge)) / denom;
    r.p_value = r.corrected_p = std::min(1.0, p);
    return r;
  }

  double var = static_cast<double>(n) * (n + 1) * (2.0 * n + 1) / 24.0;
  for (std::int64_t t : tie_sizes)
    var -= static_cast<double>(t * t * t - t) / 48.0;
  if (var <= 0.0) {  // all |d| identical and... only possible with one tie group
    r.p_value = r.corrected_p = 1.0;
    return r;
  }
  double z = (w_plus - mean_w) / std::sqrt(var);
  r.p_value = r.corrected_p = std::erfc(std::fabs(z) / std::sqrt(2.0));
  return r;
}

std::vector<double> bonferroni(std::span<const double> p_values, std::size_t m) {
  if (m < p_values.size())
    throw UserError("bonferroni: m must be at least the number of tests");
  std::vector<double> out;
  out.reserve(p_values.size());
  for (double p : p_values) {
    if (p < 0.0 || p > 1.0) throw UserError("bonferroni: p value outside [0,1]");
    out.push_back(std::min(1.0, static_cast<double>(m) * p));
  }
  return out;
}

std::string significance_arrows(double corrected_p, Direction direction) {
  int arrows = 0;
  if (corrected_p < 0.0001)
    arrows = 4;
  else if (corrected_p < 0.001)
    arrows = 3;
  else if (corrected_p < 0.01)
    arrows = 2;
  else if (corrected_p < 0.05)
    arrows = 1;
  if (arrows == 0 || direction == Direction::zero) return "------";
  const char* glyph = direction == Direction::positive ? "↑" : "↓";
  std::string out;
  for (int i = 0; i < arrows; ++i) out += glyph;
  return out;
}

}  // namespace commgen::stats
