#pragma once

#include <string>
#include <vector>

#include "commgen/common.hpp"

namespace commgen {

// Feature table for either prediction task. Missing feature values are NaN
// (imputed later from training folds). Growth datasets carry a second target
// column, rate_target, which is NaN for rows below the median label.
struct Dataset {
  std::vector<std::string> id_columns;              // e.g. {"child"} or {"pair_id", "user"}
  std::vector<std::vector<std::string>> ids;        // per row
  std::vector<std::string> feature_names;
  std::vector<double> x;                            // row-major rows() x cols()
  std::vector<double> label;
  std::vector<double> rate_target;                  // empty unless the task has one

  std::size_t rows() const { return label.size(); }
  std::size_t cols() const { return feature_names.size(); }
  double at(std::size_t r, std::size_t c) const { return x[r * cols() + c]; }
};

void write_dataset_tsv(const std::string& path, const Dataset& ds);
Dataset read_dataset_tsv(const std::string& path);

}  // namespace commgen
