#include "commgen/exporters.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace commgen::exporters {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UserError("cannot open for writing: " + path);
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw UserError("I/O error while writing: " + path);
}

std::string num(double v) {
  if (std::isnan(v)) return "NA";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_edges_tsv(const std::string& path, const CorpusIndex& index,
                     std::span<const ChildGenealogy> genealogies, int k, double min_weight) {
  auto out = open_out(path);
  out << "parent\tchild\tweight\tk\n";
  for (const auto& g : genealogies)
    for (const auto& e : g.edges) {
      if (min_weight > 0.0 && e.weight <= min_weight) continue;
      out << index.community_names[e.parent] << '\t' << index.community_names[e.child] << '\t'
          << num(e.weight) << '\t' << k << '\n';
    }
  finish(out, path);
}

void write_parent_stats_tsv(const std::string& path, const CorpusIndex& index,
                            std::span<const ChildGenealogy> genealogies) {
  auto out = open_out(path);
  out << "child\tk\tnum_parents";
  if (!genealogies.empty())
    for (const auto& [thr, cnt] : genealogies.front().stats.num_parents_weight_at_least)
      out << "\tnum_parents_w_ge_" << thr;
  out << "\tmax_parent_weight\tfraction_new_users\n";
  for (const auto& g : genealogies) {
    out << index.community_names[g.stats.child] << '\t' << g.stats.k << '\t'
        << g.stats.num_parents;
    for (const auto& [thr, cnt] : g.stats.num_parents_weight_at_least) out << '\t' << cnt;
    out << '\t' << num(g.stats.max_parent_weight) << '\t' << num(g.stats.fraction_new_users)
        << '\n';
  }
  finish(out, path);
}

void write_series_tsv(const std::string& path, std::span<const SeriesPoint> points,
                      bool with_bucket) {
  auto out = open_out(path);
  if (with_bucket)
    out << "k\tbucket_start\tproperty\tmean\tse\tn\n";
  else
    out << "k\tproperty\tmean\tse\tn\n";
  for (const auto& p : points) {
    out << p.k << '\t';
    if (with_bucket) out << p.bucket_start << '\t';
    out << p.property << '\t' << num(p.mean) << '\t' << num(p.se) << '\t' << p.n << '\n';
  }
  finish(out, path);
}

void write_eval_runs_tsv(const std::string& path, const ml::EvalReport& report) {
  auto out = open_out(path);
  const char* metric = report.kind == ml::ModelKind::logistic ? "accuracy" : "mse";
  out << "run\t" << metric << "\tlambda\n";
  for (std::size_t i = 0; i < report.runs.size(); ++i)
    out << i << '\t' << num(report.runs[i].metric) << '\t' << num(report.runs[i].lambda)
        << '\n';
  out << "# mean\t" << num(report.metric_mean) << "\tse\t" << num(report.metric_se) << '\n';
  finish(out, path);
}

void write_eval_coeffs_tsv(const std::string& path, const ml::EvalReport& report) {
  auto out = open_out(path);
  out << "feature\tcoef_mean\tcoef_se\n";
  for (std::size_t c = 0; c < report.feature_names.size(); ++c)
    out << report.feature_names[c] << '\t' << num(report.coef_mean[c]) << '\t'
        << num(report.coef_se[c]) << '\n';
  finish(out, path);
}

void write_comparisons_tsv(const std::string& path, std::span<const Comparison> rows) {
  auto out = open_out(path);
  out << "set_a\tset_b\tmean_a\tmean_b\tstatistic\tp_value\tcorrected_p\tsignificance\n";
  for (const auto& r : rows) {
    out << r.set_a << '\t' << r.set_b << '\t' << num(r.mean_a) << '\t' << num(r.mean_b)
        << '\t' << num(r.test.statistic) << '\t' << num(r.test.p_value) << '\t'
        << num(r.test.corrected_p) << '\t'
        << stats::significance_arrows(r.test.corrected_p, r.test.direction) << '\n';
  }
  finish(out, path);
}

std::vector<SignificanceRow> significance_table(const Dataset& ds) {
  const bool has_rate = !ds.rate_target.empty();
  std::vector<SignificanceRow> rows(ds.cols());

  for (std::size_t c = 0; c < ds.cols(); ++c) {
    rows[c].feature = ds.feature_names[c];
    std::vector<double> pos, neg;
    for (std::size_t r = 0; r < ds.rows(); ++r) {
      double v = ds.at(r, c);
      if (std::isnan(v)) continue;
      (ds.label[r] > 0.5 ? pos : neg).push_back(v);
    }
    try {
      if (pos.size() >= 2 && neg.size() >= 2) rows[c].first = stats::t_test(pos, neg);
    } catch (const UserError&) {
    }
    if (has_rate) {
      std::vector<double> xs, ys;
      for (std::size_t r = 0; r < ds.rows(); ++r) {
        double v = ds.at(r, c), t = ds.rate_target[r];
        if (std::isnan(v) || std::isnan(t)) continue;
        xs.push_back(v);
        ys.push_back(t);
      }
      try {
        if (xs.size() >= 3) rows[c].second = stats::pearson(xs, ys);
      } catch (const UserError&) {
      }
    }
  }

  // Bonferroni per column over the tests actually run.
  for (int which = 0; which < 2; ++which) {
    std::vector<double> ps;
    for (const auto& r : rows) {
      const auto& t = which == 0 ? r.first : r.second;
      if (t) ps.push_back(t->p_value);
    }
    if (ps.empty()) continue;
    auto corrected = stats::bonferroni(ps, ps.size());
    std::size_t i = 0;
    for (auto& r : rows) {
      auto& t = which == 0 ? r.first : r.second;
      if (t) t->corrected_p = corrected[i++];
    }
  }
  return rows;
}

void write_significance_tsv(const std::string& path, std::span<const SignificanceRow> rows,
                            const std::string& first_name, const std::string& second_name) {
  auto out = open_out(path);
  const bool two = !second_name.empty();
  out << "feature\t" << first_name << "_statistic\t" << first_name << "_p\t" << first_name
      << "_corrected_p\t" << first_name;
  if (two)
    out << "\t" << second_name << "_statistic\t" << second_name << "_p\t" << second_name
        << "_corrected_p\t" << second_name;
  out << '\n';
  auto cell = [&](const std::optional<stats::TestResult>& t) {
    if (!t) {
      out << "NA\tNA\tNA\tNA";
      return;
    }
    out << num(t->statistic) << '\t' << num(t->p_value) << '\t' << num(t->corrected_p) << '\t'
        << stats::significance_arrows(t->corrected_p, t->direction);
  };
  for (const auto& r : rows) {
    out << r.feature << '\t';
    cell(r.first);
    if (two) {
      out << '\t';
      cell(r.second);
    }
    out << '\n';
  }
  finish(out, path);
}

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UserError("cannot hash missing file: " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  return h;
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    const std::map<std::string, std::string>& config,
                    std::span<const ManifestInput> inputs,
                    std::span<const std::string> outputs) {
  nlohmann::json j;
  j["tool"] = "commgen";
  j["version"] = "1.0.0";
  j["command"] = command;
  j["config"] = config;
  nlohmann::json ins = nlohmann::json::object();
  for (const auto& in : inputs) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(in.hash));
    ins[in.path] = buf;
  }
  j["inputs"] = std::move(ins);
  j["outputs"] = std::vector<std::string>(outputs.begin(), outputs.end());

  std::filesystem::create_directories(out_dir);
  const std::string path = (std::filesystem::path(out_dir) / "manifest.json").string();
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

}  // namespace commgen::exporters
