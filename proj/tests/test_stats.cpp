#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"

#include "commgen/rng.hpp"
#include "commgen/stats.hpp"

using namespace commgen;
using stats::Direction;

namespace {

// Independent two-sided p oracle: adaptive Simpson quadrature of the Student
// t density over the upper tail, mapped to [0,1) by x = t + s/(1-s).
double t_pdf(double x, double df) {
  double ln = std::lgamma((df + 1) / 2) - std::lgamma(df / 2) -
              0.5 * std::log(df * M_PI) - (df + 1) / 2 * std::log1p(x * x / df);
  return std::exp(ln);
}

double simpson(double (*f)(double, double), double df, double a, double b, double fa,
               double fb, double fm, double eps, int depth) {
  double m = (a + b) / 2;
  double lm = (a + m) / 2, rm = (m + b) / 2;
  double flm = f(lm, df), frm = f(rm, df);
  double whole = (b - a) / 6 * (fa + 4 * fm + fb);
  double left = (m - a) / 6 * (fa + 4 * flm + fm);
  double right = (b - m) / 6 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) < 15 * eps)
    return left + right + (left + right - whole) / 15;
  return simpson(f, df, a, m, fa, fm, flm, eps / 2, depth - 1) +
         simpson(f, df, m, b, fm, fb, frm, eps / 2, depth - 1);
}

double tail_integrand(double s, double df_and_t);  // fwd

// carries |t| via thread-local because the simpson helper takes one parameter
thread_local double g_tail_t = 0;
double tail_integrand(double s, double df) {
  double x = g_tail_t + s / (1 - s);
  double jac = 1.0 / ((1 - s) * (1 - s));
  return t_pdf(x, df) * jac;
}

double two_sided_p_oracle(double t, double df) {
  g_tail_t = std::fabs(t);
  const double a = 0.0, b = 1.0 - 1e-9;
  double fa = tail_integrand(a, df), fb = tail_integrand(b, df);
  double fm = tail_integrand((a + b) / 2, df);
  double tail = simpson(tail_integrand, df, a, b, fa, fb, fm, 1e-14, 48);
  return 2.0 * tail;
}

// Exact Wilcoxon oracle: enumerate all 2^n sign assignments directly.
double wilcoxon_exact_oracle(const std::vector<double>& diffs) {
  const std::size_t n = diffs.size();
  std::vector<double> ranks(n);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::fabs(diffs[a]) < std::fabs(diffs[b]);
  });
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && std::fabs(diffs[order[j]]) == std::fabs(diffs[order[i]])) ++j;
    double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = avg;
    i = j;
  }
  double observed = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (diffs[i] > 0) observed += ranks[i];

  std::size_t le = 0, ge = 0;
  const std::size_t total = std::size_t{1} << n;
  for (std::size_t mask = 0; mask < total; ++mask) {
    double w = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (std::size_t{1} << i)) w += ranks[i];
    if (w <= observed + 1e-12) ++le;
    if (w >= observed - 1e-12) ++ge;
  }
  double p = 2.0 * static_cast<double>(std::min(le, ge)) / static_cast<double>(total);
  return std::min(1.0, p);
}

}  // namespace

TEST_CASE("Welch t test") {
  SUBCASE("identical samples") {
    std::vector<double> a{1, 2, 3};
    auto r = stats::t_test(a, a);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == 1.0);
    CHECK(r.direction == Direction::zero);
  }
  SUBCASE("hand-checked example") {
    std::vector<double> a{1, 2, 3}, b{2, 3, 4};
    auto r = stats::t_test(a, b);
    CHECK(r.statistic == doctest::Approx(-1.225).epsilon(1e-3));
    CHECK(r.p_value == doctest::Approx(0.288).epsilon(2e-3));
    CHECK(std::fabs(r.p_value - two_sided_p_oracle(r.statistic, 4.0)) < 1e-9);
    CHECK(r.direction == Direction::negative);
  }
  SUBCASE("widely separated samples") {
    std::vector<double> a{100, 100.1, 99.9, 100.2, 99.8, 100.05, 99.95, 100.15};
    std::vector<double> b{1, 1.2, 0.8, 1.1, 0.9, 1.05, 0.95, 1.15};
    auto r = stats::t_test(a, b);
    CHECK(r.p_value < 1e-6);
    CHECK(r.direction == Direction::positive);
  }
  SUBCASE("statistic negates when arguments swap") {
    std::vector<double> a{3, 5, 9, 1}, b{2, 2, 7, 4};
    auto ab = stats::t_test(a, b);
    auto ba = stats::t_test(b, a);
    CHECK(ab.statistic == doctest::Approx(-ba.statistic).epsilon(1e-12));
    CHECK(ab.p_value == doctest::Approx(ba.p_value).epsilon(1e-12));
  }
  SUBCASE("zero variance, equal means") {
    std::vector<double> a{2, 2, 2}, b{2, 2};
    auto r = stats::t_test(a, b);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == 1.0);
  }
  SUBCASE("random instances match the quadrature oracle") {
    Rng rng(555);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> a, b;
      for (int i = 0; i < 5 + static_cast<int>(rng.below(20)); ++i)
        a.push_back(rng.next_double() * 10);
      for (int i = 0; i < 5 + static_cast<int>(rng.below(20)); ++i)
        b.push_back(rng.next_double() * 10 + rng.next_double());
      auto r = stats::t_test(a, b);
      // recompute df independently
      double ma = 0, mb = 0;
      for (double v : a) ma += v;
      for (double v : b) mb += v;
      ma /= a.size();
      mb /= b.size();
      double va = 0, vb = 0;
      for (double v : a) va += (v - ma) * (v - ma);
      for (double v : b) vb += (v - mb) * (v - mb);
      va /= (a.size() - 1);
      vb /= (b.size() - 1);
      double sa = va / a.size(), sb = vb / b.size();
      double df = (sa + sb) * (sa + sb) /
                  (sa * sa / (a.size() - 1) + sb * sb / (b.size() - 1));
      CHECK(std::fabs(r.p_value - two_sided_p_oracle(r.statistic, df)) < 1e-9);
    }
  }
  SUBCASE("too-small samples throw") {
    std::vector<double> a{1}, b{1, 2};
    CHECK_THROWS_AS(stats::t_test(a, b), UserError);
  }
}

TEST_CASE("Pearson correlation") {
  SUBCASE("perfect positive") {
    std::vector<double> x{1, 2, 3, 4}, y{2, 4, 6, 8};
    auto r = stats::pearson(x, y);
    CHECK(r.statistic == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.p_value == 0.0);
    CHECK(r.direction == Direction::positive);
  }
  SUBCASE("perfect negative") {
    std::vector<double> x{1, 2, 3}, y{-1, -2, -3};
    auto r = stats::pearson(x, y);
    CHECK(r.statistic == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(r.direction == Direction::negative);
  }
  SUBCASE("random pairs match the covariance-formula oracle") {
    Rng rng(808);
    std::vector<double> x, y;
    for (int i = 0; i < 50; ++i) {
      double xv = rng.next_double() * 5;
      x.push_back(xv);
      y.push_back(0.3 * xv + rng.next_double());
    }
    auto r = stats::pearson(x, y);
    double mx = 0, my = 0;
    for (int i = 0; i < 50; ++i) {
      mx += x[i];
      my += y[i];
    }
    mx /= 50;
    my /= 50;
    double sxy = 0, sxx = 0, syy = 0;
    for (int i = 0; i < 50; ++i) {
      sxy += (x[i] - mx) * (y[i] - my);
      sxx += (x[i] - mx) * (x[i] - mx);
      syy += (y[i] - my) * (y[i] - my);
    }
    CHECK(std::fabs(r.statistic - sxy / std::sqrt(sxx * syy)) < 1e-12);
    double t = r.statistic * std::sqrt(48.0 / (1 - r.statistic * r.statistic));
    CHECK(std::fabs(r.p_value - two_sided_p_oracle(t, 48.0)) < 1e-9);
  }
  SUBCASE("degenerate inputs throw") {
    std::vector<double> x{1, 1, 1}, y{1, 2, 3}, small{1, 2};
    CHECK_THROWS_AS(stats::pearson(x, y), UserError);
    CHECK_THROWS_AS(stats::pearson(small, small), UserError);
  }
}

TEST_CASE("Wilcoxon signed rank") {
  SUBCASE("all differences zero") {
    std::vector<double> a{1, 2, 3, 4, 5};
    auto r = stats::wilcoxon_signed_rank(a, a);
    CHECK(r.p_value == 1.0);
    CHECK(r.direction == Direction::zero);
  }
  SUBCASE("six strictly positive differences: exact two-sided p = 1/32") {
    std::vector<double> a{2, 3, 4, 5, 6, 7}, b{1, 1, 1, 1, 1, 1};
    auto r = stats::wilcoxon_signed_rank(a, b);
    CHECK(r.statistic == doctest::Approx(21.0));  // sum of ranks 1..6
    CHECK(r.p_value == doctest::Approx(1.0 / 32.0).epsilon(1e-12));
    CHECK(r.direction == Direction::positive);
  }
  SUBCASE("exact distribution matches brute-force enumeration up to n=12") {
    Rng rng(99);
    for (int trial = 0; trial < 40; ++trial) {
      const int n = 5 + static_cast<int>(rng.below(8));  // 5..12
      std::vector<double> a(n), b(n);
      for (int i = 0; i < n; ++i) {
        // integer-ish values force ties in |d|
        a[i] = static_cast<double>(rng.below(6));
        b[i] = static_cast<double>(rng.below(6));
        if (a[i] == b[i]) a[i] += 1;  // keep differences nonzero
      }
      std::vector<double> diffs(n);
      for (int i = 0; i < n; ++i) diffs[i] = a[i] - b[i];
      auto r = stats::wilcoxon_signed_rank(a, b);
      CHECK(std::fabs(r.p_value - wilcoxon_exact_oracle(diffs)) < 1e-9);
    }
  }
  SUBCASE("normal approximation beyond n=25 stays sane and symmetric") {
    Rng rng(321);
    std::vector<double> a, b;
    for (int i = 0; i < 30; ++i) {
      a.push_back(rng.next_double() + 0.15);
      b.push_back(rng.next_double());
    }
    auto ab = stats::wilcoxon_signed_rank(a, b);
    auto ba = stats::wilcoxon_signed_rank(b, a);
    CHECK(ab.p_value >= 0.0);
    CHECK(ab.p_value <= 1.0);
    CHECK(ab.p_value == doctest::Approx(ba.p_value).epsilon(1e-12));
    CHECK(ab.direction != ba.direction);
  }
  SUBCASE("fewer than five nonzero differences throw") {
    std::vector<double> a{1, 2, 3, 4, 5}, b{1, 2, 3, 4, 6};
    CHECK_THROWS_AS(stats::wilcoxon_signed_rank(a, b), UserError);
  }
}

TEST_CASE("Bonferroni correction") {
  std::vector<double> ps{0.01, 0.5, 0.0001};
  auto corrected = stats::bonferroni(ps, 10);
  CHECK(corrected[0] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(corrected[1] == 1.0);
  CHECK(corrected[2] == doctest::Approx(0.001).epsilon(1e-15));

  SUBCASE("vector case equals the scalar map") {
    for (std::size_t i = 0; i < ps.size(); ++i) {
      auto single = stats::bonferroni(std::vector<double>{ps[i]}, 10);
      CHECK(single[0] == corrected[i]);
    }
  }
  SUBCASE("input validation") {
    std::vector<double> bad{1.5};
    CHECK_THROWS_AS(stats::bonferroni(bad, 5), UserError);
    CHECK_THROWS_AS(stats::bonferroni(ps, 2), UserError);
  }
}

TEST_CASE("significance arrows mirror the table notation") {
  CHECK(stats::significance_arrows(0.00005, Direction::positive) ==
        "↑↑↑↑");
  CHECK(stats::significance_arrows(0.0005, Direction::negative) == "↓↓↓");
  CHECK(stats::significance_arrows(0.005, Direction::positive) == "↑↑");
  CHECK(stats::significance_arrows(0.04, Direction::negative) == "↓");
  CHECK(stats::significance_arrows(0.2, Direction::positive) == "------");
  CHECK(stats::significance_arrows(0.001, Direction::zero) == "------");
}
