#include "commgen/ml.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

#include "commgen/rng.hpp"

namespace commgen::ml {

namespace {

double stable_softplus(double z) {
  // log(1 + e^z) without overflow
  return std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z)));
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Cholesky solve of A x = b for a small dense SPD matrix; A and b are
// overwritten. Returns false when A is not positive definite.
bool cholesky_solve(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      if (i == j) {
        if (s <= 0.0) return false;
        a[i * n + i] = std::sqrt(s);
      } else {
        a[i * n + j] = s / a[j * n + j];
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {  // L y = b
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
    b[i] = s / a[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {  // L^T x = y
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[k * n + i] * b[k];
    b[i] = s / a[i * n + i];
  }
  return true;
}

}  // namespace

Scaler fit_scaler(std::span<const double> x, std::size_t rows, std::size_t cols) {
  Scaler s;
  s.mean.assign(cols, 0.0);
  s.sigma.assign(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) s.mean[c] += x[r * cols + c];
  for (double& m : s.mean) m /= static_cast<double>(rows);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      double d = x[r * cols + c] - s.mean[c];
      s.sigma[c] += d * d;
    }
  for (double& v : s.sigma) v = std::sqrt(v / static_cast<double>(rows));
  return s;
}

void apply_scaler(const Scaler& s, std::span<double> x, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      double& v = x[r * cols + c];
      v = s.sigma[c] > 0.0 ? (v - s.mean[c]) / s.sigma[c] : 0.0;
    }
}

Problem make_problem(const Dataset& ds, bool use_rate_target,
                     std::span<const std::size_t> feature_subset) {
  std::vector<std::size_t> sel(feature_subset.begin(), feature_subset.end());
  if (sel.empty())
    for (std::size_t c = 0; c < ds.cols(); ++c) sel.push_back(c);

  Problem p;
  for (std::size_t c : sel) p.feature_names.push_back(ds.feature_names[c]);
  p.cols = sel.size();
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    double target;
    if (use_rate_target) {
      if (ds.rate_target.empty()) throw UserError("dataset has no rate_target column");
      target = ds.rate_target[r];
      if (std::isnan(target)) continue;
    } else {
      target = ds.label[r];
    }
    for (std::size_t c : sel) p.x.push_back(ds.at(r, c));
    p.y.push_back(target);
  }
  p.rows = p.y.size();
  return p;
}

double loss_and_gradient(ModelKind kind, std::span<const double> x, std::span<const double> y,
                         std::size_t rows, std::size_t cols, std::span<const double> w,
                         double intercept, double lambda, std::span<double> grad_w,
                         double& grad_b) {
  const double n = static_cast<double>(rows);
  std::fill(grad_w.begin(), grad_w.end(), 0.0);
  grad_b = 0.0;
  double loss = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = &x[r * cols];
    double z = intercept;
    for (std::size_t c = 0; c < cols; ++c) z += w[c] * row[c];
    double g;
    if (kind == ModelKind::logistic) {
      loss += stable_softplus(z) - y[r] * z;
      g = sigmoid(z) - y[r];
    } else {
      double res = z - y[r];
      loss += res * res;
      g = 2.0 * res;
    }
    for (std::size_t c = 0; c < cols; ++c) grad_w[c] += g * row[c];
    grad_b += g;
  }
  loss /= n;
  grad_b /= n;
  for (std::size_t c = 0; c < cols; ++c) {
    grad_w[c] = grad_w[c] / n + lambda * w[c];
    loss += 0.5 * lambda * w[c] * w[c];
  }
  return loss;
}

namespace {

double objective(ModelKind kind, std::span<const double> x, std::span<const double> y,
                 std::size_t rows, std::size_t cols, std::span<const double> w,
                 double intercept, double lambda) {
  const double n = static_cast<double>(rows);
  double loss = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = &x[r * cols];
    double z = intercept;
    for (std::size_t c = 0; c < cols; ++c) z += w[c] * row[c];
    if (kind == ModelKind::logistic)
      loss += stable_softplus(z) - y[r] * z;
    else {
      double res = z - y[r];
      loss += res * res;
    }
  }
  loss /= n;
  for (std::size_t c = 0; c < cols; ++c) loss += 0.5 * lambda * w[c] * w[c];
  return loss;
}

}  // namespace

LinearModel fit(ModelKind kind, const Problem& p, double lambda) {
  if (p.rows < 2) throw UserError("fit needs at least 2 rows");
  if (lambda <= 0) throw UserError("lambda must be positive");
  for (double v : p.x)
    if (!std::isfinite(v)) throw DataError("fit: non-finite feature value");
  for (double v : p.y)
    if (!std::isfinite(v)) throw DataError("fit: non-finite target value");

  const std::size_t d = p.cols;
  const std::size_t dim = d + 1;  // weights + intercept, intercept last
  const double n = static_cast<double>(p.rows);
  std::vector<double> w(d, 0.0);
  double b = 0.0;

  std::vector<double> grad(dim), hess(dim * dim), step(dim), w_try(d);
  constexpr double kTol = 1e-8;
  constexpr int kMaxIter = 100;

  for (int iter = 0; iter < kMaxIter; ++iter) {
    double gb = 0;
    double obj = loss_and_gradient(kind, p.x, p.y, p.rows, p.cols, w, b,
                                   lambda, {grad.data(), d}, gb);
    grad[d] = gb;
    double gmax = 0;
    for (double g : grad) gmax = std::max(gmax, std::fabs(g));
    if (gmax <= kTol) break;

    // Hessian
    std::fill(hess.begin(), hess.end(), 0.0);
    for (std::size_t r = 0; r < p.rows; ++r) {
      const double* row = &p.x[r * d];
      double z = b;
      for (std::size_t c = 0; c < d; ++c) z += w[c] * row[c];
      double s = kind == ModelKind::logistic ? sigmoid(z) * (1.0 - sigmoid(z)) : 2.0;
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j <= i; ++j) hess[i * dim + j] += s * row[i] * row[j];
        hess[d * dim + i] += s * row[i];
      }
      hess[d * dim + d] += s;
    }
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        hess[i * dim + j] /= n;
        hess[j * dim + i] = hess[i * dim + j];
      }
    for (std::size_t i = 0; i < d; ++i) hess[i * dim + i] += lambda;

    for (std::size_t i = 0; i < dim; ++i) step[i] = -grad[i];
    std::vector<double> h = hess;
    double jitter = 1e-10;
    while (!cholesky_solve(h, step, dim)) {
      h = hess;
      for (std::size_t i = 0; i < dim; ++i) h[i * dim + i] += jitter;
      for (std::size_t i = 0; i < dim; ++i) step[i] = -grad[i];
      jitter *= 10;
      if (jitter > 1.0) throw DataError("fit: Hessian factorization failed");
    }

    double slope = 0;
    for (std::size_t i = 0; i < dim; ++i) slope += grad[i] * step[i];
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t c = 0; c < d; ++c) w_try[c] = w[c] + t * step[c];
      double b_try = b + t * step[d];
      double obj_try = objective(kind, p.x, p.y, p.rows, p.cols, w_try, b_try, lambda);
      if (obj_try <= obj + 1e-4 * t * slope) {
        w = w_try;
        b = b_try;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;  // step stalled at numeric precision
  }

  LinearModel m;
  m.kind = kind;
  m.weights = std::move(w);
  m.intercept = b;
  m.lambda = lambda;
  return m;
}

double predict_score(const LinearModel& m, std::span<const double> row) {
  double z = m.intercept;
  for (std::size_t c = 0; c < m.weights.size(); ++c) z += m.weights[c] * row[c];
  return z;
}

double evaluate(const LinearModel& m, std::span<const double> x, std::span<const double> y,
                std::size_t rows, std::size_t cols) {
  double acc = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    double z = predict_score(m, x.subspan(r * cols, cols));
    if (m.kind == ModelKind::logistic) {
      double pred = z >= 0.0 ? 1.0 : 0.0;
      if (pred == y[r]) acc += 1.0;
    } else {
      double res = z - y[r];
      acc += res * res;
    }
  }
  return acc / static_cast<double>(rows);
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int x = -8; x <= 1; ++x) grid.push_back(std::ldexp(1.0, x));
  return grid;
}

std::vector<double> EvalReport::per_run_metrics() const {
  std::vector<double> out;
  out.reserve(runs.size());
  for (const auto& r : runs) out.push_back(r.metric);
  return out;
}

SplitSizes split_sizes(std::size_t rows, double train_fraction, double val_fraction) {
  SplitSizes s;
  s.train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(rows)));
  s.val = static_cast<std::size_t>(std::floor(val_fraction * static_cast<double>(rows)));
  s.test = rows - s.train - s.val;
  return s;
}

namespace {

struct Split {
  std::vector<std::size_t> train, val, test;
};

Split make_split(std::size_t rows, Rng& rng, double train_frac, double val_frac) {
  std::vector<std::size_t> idx(rows);
  for (std::size_t i = 0; i < rows; ++i) idx[i] = i;
  rng.shuffle(idx);
  SplitSizes n = split_sizes(rows, train_frac, val_frac);
  Split s;
  s.train.assign(idx.begin(), idx.begin() + n.train);
  s.val.assign(idx.begin() + n.train, idx.begin() + n.train + n.val);
  s.test.assign(idx.begin() + n.train + n.val, idx.end());
  return s;
}

void gather(const Problem& p, const std::vector<std::size_t>& rows, std::vector<double>& x,
            std::vector<double>& y) {
  x.clear();
  y.clear();
  x.reserve(rows.size() * p.cols);
  for (std::size_t r : rows) {
    for (std::size_t c = 0; c < p.cols; ++c) x.push_back(p.x[r * p.cols + c]);
    y.push_back(p.y[r]);
  }
}

void impute_train_means(std::vector<double>& train_x, std::size_t cols,
                        std::vector<double>& means) {
  const std::size_t rows = cols == 0 ? 0 : train_x.size() / cols;
  means.assign(cols, 0.0);
  for (std::size_t c = 0; c < cols; ++c) {
    double sum = 0;
    std::size_t n = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      double v = train_x[r * cols + c];
      if (!std::isnan(v)) {
        sum += v;
        ++n;
      }
    }
    means[c] = n > 0 ? sum / static_cast<double>(n) : 0.0;
  }
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      if (std::isnan(train_x[r * cols + c])) train_x[r * cols + c] = means[c];
}

void impute_with(std::vector<double>& x, std::size_t cols, const std::vector<double>& means) {
  const std::size_t rows = cols == 0 ? 0 : x.size() / cols;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      if (std::isnan(x[r * cols + c])) x[r * cols + c] = means[c];
}

bool single_class(const std::vector<double>& y) {
  for (std::size_t i = 1; i < y.size(); ++i)
    if (y[i] != y[0]) return false;
  return true;
}

RunResult one_run(const Problem& p, ModelKind kind, const ProtocolParams& params,
                  const std::vector<double>& grid, int repeat) {
  Rng rng = Rng::substream(params.seed, static_cast<std::uint64_t>(repeat));

  Split split;
  std::vector<double> train_x, train_y, val_x, val_y, test_x, test_y;
  for (int attempt = 0;; ++attempt) {
    split = make_split(p.rows, rng, params.train_fraction, params.val_fraction);
    gather(p, split.train, train_x, train_y);
    if (kind != ModelKind::logistic || !single_class(train_y)) break;
    if (attempt >= params.max_split_retries)
      throw UserError("could not draw a training split with both classes");
  }
  gather(p, split.val, val_x, val_y);
  gather(p, split.test, test_x, test_y);

  std::vector<double> means;
  impute_train_means(train_x, p.cols, means);
  impute_with(val_x, p.cols, means);
  impute_with(test_x, p.cols, means);

  Scaler scaler = fit_scaler(train_x, train_y.size(), p.cols);
  apply_scaler(scaler, train_x, train_y.size(), p.cols);
  apply_scaler(scaler, val_x, val_y.size(), p.cols);
  apply_scaler(scaler, test_x, test_y.size(), p.cols);

  Problem train;
  train.feature_names = p.feature_names;
  train.x = train_x;
  train.y = train_y;
  train.rows = train_y.size();
  train.cols = p.cols;

  // Grid search on the validation metric; ties keep the smaller lambda.
  LinearModel best;
  double best_val = 0;
  bool have_best = false;
  for (double lambda : grid) {
    LinearModel m = fit(kind, train, lambda);
    double v = evaluate(m, val_x, val_y, val_y.size(), p.cols);
    bool better = !have_best ||
                  (kind == ModelKind::logistic ? v > best_val : v < best_val);
    if (better) {
      best = std::move(m);
      best_val = v;
      have_best = true;
    }
  }

  RunResult out;
  out.metric = evaluate(best, test_x, test_y, test_y.size(), p.cols);
  out.lambda = best.lambda;
  out.weights = best.weights;
  out.intercept = best.intercept;
  return out;
}

}  // namespace

EvalReport run_protocol(const Problem& p, ModelKind kind, const ProtocolParams& params) {
  if (p.rows < 10) throw UserError("protocol needs at least 10 rows");
  if (params.repeats < 1) throw UserError("repeats must be positive");
  const std::vector<double> grid =
      params.lambda_grid.empty() ? default_lambda_grid() : params.lambda_grid;

  EvalReport report;
  report.kind = kind;
  report.feature_names = p.feature_names;
  report.runs.resize(params.repeats);

#pragma omp parallel for schedule(dynamic)
  for (int rep = 0; rep < params.repeats; ++rep)
    report.runs[rep] = one_run(p, kind, params, grid, rep);

  // serial, ordered aggregation: identical for any thread count
  double sum = 0;
  for (const auto& r : report.runs) sum += r.metric;
  report.metric_mean = sum / static_cast<double>(report.runs.size());
  double ss = 0;
  for (const auto& r : report.runs) {
    double d = r.metric - report.metric_mean;
    ss += d * d;
  }
  report.metric_se =
      report.runs.size() > 1
          ? std::sqrt(ss / static_cast<double>(report.runs.size() - 1)) /
                std::sqrt(static_cast<double>(report.runs.size()))
          : 0.0;

  report.coef_mean.assign(p.cols, 0.0);
  report.coef_se.assign(p.cols, 0.0);
  for (const auto& r : report.runs)
    for (std::size_t c = 0; c < p.cols; ++c) report.coef_mean[c] += r.weights[c];
  for (double& v : report.coef_mean) v /= static_cast<double>(report.runs.size());
  for (const auto& r : report.runs)
    for (std::size_t c = 0; c < p.cols; ++c) {
      double d = r.weights[c] - report.coef_mean[c];
      report.coef_se[c] += d * d;
    }
  for (double& v : report.coef_se)
    v = report.runs.size() > 1
            ? std::sqrt(v / static_cast<double>(report.runs.size() - 1)) /
                  std::sqrt(static_cast<double>(report.runs.size()))
            : 0.0;
  return report;
}

}  // namespace commgen::ml
