#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "commgen/common.hpp"
#include "commgen/dataset.hpp"

namespace commgen::ml {

enum class ModelKind { logistic, ridge };

// Per-feature training-set moments; sigma is the population stddev and stays
// zero for constant features (their standardized value is 0).
struct Scaler {
  std::vector<double> mean;
  std::vector<double> sigma;
};

Scaler fit_scaler(std::span<const double> x, std::size_t rows, std::size_t cols);
void apply_scaler(const Scaler& s, std::span<double> x, std::size_t rows, std::size_t cols);

struct Problem {
  std::vector<std::string> feature_names;
  std::vector<double> x;  // row-major, may contain NaN (imputed per split)
  std::vector<double> y;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

// Extracts a Problem from a dataset. `feature_subset` selects columns (empty
// means all). With use_rate_target, rows whose rate_target is NaN are
// dropped and the target is rate_target instead of label.
Problem make_problem(const Dataset& ds, bool use_rate_target = false,
                     std::span<const std::size_t> feature_subset = {});

struct LinearModel {
  ModelKind kind = ModelKind::logistic;
  std::vector<double> weights;
  double intercept = 0;
  double lambda = 0;

  friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

// Objective and gradient of
//   logistic: (1/n) sum log-loss          + (lambda/2) |w|^2
//   ridge:    (1/n) sum squared residual  + (lambda/2) |w|^2
// with the intercept unpenalized. Gradient spans must hold cols and 1 values.
double loss_and_gradient(ModelKind kind, std::span<const double> x, std::span<const double> y,
                         std::size_t rows, std::size_t cols, std::span<const double> w,
                         double intercept, double lambda, std::span<double> grad_w,
                         double& grad_b);

// Damped Newton from zero initialization to gradient sup-norm 1e-8.
// Deterministic; throws DataError on non-finite inputs.
LinearModel fit(ModelKind kind, const Problem& p, double lambda);

double predict_score(const LinearModel& m, std::span<const double> row);
// Accuracy for logistic (threshold 0.5), MSE for ridge.
double evaluate(const LinearModel& m, std::span<const double> x, std::span<const double> y,
                std::size_t rows, std::size_t cols);

std::vector<double> default_lambda_grid();  // {2^-8, ..., 2^1}, ascending

struct SplitSizes {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};
// The deterministic 70/10/20 partition used by the protocol.
SplitSizes split_sizes(std::size_t rows, double train_fraction, double val_fraction);

struct ProtocolParams {
  int repeats = 30;
  std::uint64_t seed = 0;
  std::vector<double> lambda_grid;  // empty: default grid
  double train_fraction = 0.7;
  double val_fraction = 0.1;
  int max_split_retries = 64;
};

struct RunResult {
  double metric = 0;  // test accuracy (logistic) or test MSE (ridge)
  double lambda = 0;
  std::vector<double> weights;  // standardized scale
  double intercept = 0;

  friend bool operator==(const RunResult&, const RunResult&) = default;
};

struct EvalReport {
  ModelKind kind = ModelKind::logistic;
  std::vector<std::string> feature_names;
  std::vector<RunResult> runs;
  double metric_mean = 0;
  double metric_se = 0;
  std::vector<double> coef_mean;
  std::vector<double> coef_se;

  std::vector<double> per_run_metrics() const;
  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

// The repeated-split protocol: per repeat, a seeded 70/10/20 split,
// train-mean imputation of NaNs, train-based standardization, grid search on
// the validation metric, and a test-set measurement. Repeats run in parallel
// on independent RNG substreams; the report is identical for any thread
// count.
EvalReport run_protocol(const Problem& p, ModelKind kind, const ProtocolParams& params);

}  // namespace commgen::ml
