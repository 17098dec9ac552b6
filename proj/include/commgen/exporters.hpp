#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "commgen/common.hpp"
#include "commgen/corpus.hpp"
#include "commgen/dataset.hpp"
#include "commgen/genealogy.hpp"
#include "commgen/ml.hpp"
#include "commgen/stats.hpp"

namespace commgen::exporters {

// Edge list (parent, child, weight, k). min_weight > 0 applies the display
// filter: only edges with weight strictly greater pass.
void write_edges_tsv(const std::string& path, const CorpusIndex& index,
                     std::span<const ChildGenealogy> genealogies, int k,
                     double min_weight = 0.0);

void write_parent_stats_tsv(const std::string& path, const CorpusIndex& index,
                            std::span<const ChildGenealogy> genealogies);

// Emergence (bucket column omitted) or time-series points.
void write_series_tsv(const std::string& path, std::span<const SeriesPoint> points,
                      bool with_bucket);

void write_eval_runs_tsv(const std::string& path, const ml::EvalReport& report);
void write_eval_coeffs_tsv(const std::string& path, const ml::EvalReport& report);

struct Comparison {
  std::string set_a;
  std::string set_b;
  double mean_a = 0;
  double mean_b = 0;
  stats::TestResult test;
};
void write_comparisons_tsv(const std::string& path, std::span<const Comparison> rows);

// One row of a Table 1/2-style significance table. Absent entries mean the
// test was inapplicable (e.g. a constant feature).
struct SignificanceRow {
  std::string feature;
  std::optional<stats::TestResult> first;   // growth classification / early member
  std::optional<stats::TestResult> second;  // rate regression (growth only)
};

// Welch t per feature between label groups and, when rate targets exist,
// Pearson correlation against the rate target. Bonferroni m = number of
// applicable tests per column.
std::vector<SignificanceRow> significance_table(const Dataset& ds);

void write_significance_tsv(const std::string& path, std::span<const SignificanceRow> rows,
                            const std::string& first_name, const std::string& second_name);

std::uint64_t fnv1a_file(const std::string& path);

// manifest.json: enough to re-run the command bit-identically.
struct ManifestInput {
  std::string path;
  std::uint64_t hash = 0;
};
void write_manifest(const std::string& out_dir, const std::string& command,
                    const std::map<std::string, std::string>& config,
                    std::span<const ManifestInput> inputs,
                    std::span<const std::string> outputs);

}  // namespace commgen::exporters
