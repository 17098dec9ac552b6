// commgen: community genealogy pipeline driver.
//
// Subcommands cover the full pipeline: synth -> ingest -> genealogy /
// emergence / timeseries -> growth-dataset -> growth-eval and early-dataset
// -> early-eval, plus export for re-emitting display tables. Every run writes
// a manifest.json with the configuration, seeds, and input hashes.

#include <omp.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "commgen/corpus.hpp"
#include "commgen/early_member.hpp"
#include "commgen/event.hpp"
#include "commgen/exporters.hpp"
#include "commgen/genealogy.hpp"
#include "commgen/growth.hpp"
#include "commgen/ml.hpp"
#include "commgen/stats.hpp"
#include "commgen/synth.hpp"

namespace fs = std::filesystem;
using namespace commgen;

namespace {

struct CommonOpts {
  std::string input;
  std::string index;
  std::string out_dir = ".";
  int workers = 0;
};

struct EligibilityOpts {
  std::size_t min_members = 100;
  Timestamp created_after = 0;
  Timestamp created_until = 0;  // 0: derive (max event time - 90 days)
};

std::string resolve_index_path(const std::string& index) {
  fs::path p(index);
  if (p.is_relative()) {
    if (const char* cache = std::getenv("COMMGEN_CACHE_DIR"); cache && *cache)
      return (fs::path(cache) / p).string();
  }
  return index;
}

void apply_workers(int workers) {
  if (workers > 0) omp_set_num_threads(workers);
}

struct LoadedCorpus {
  CorpusIndex index;
  std::vector<exporters::ManifestInput> inputs;
};

LoadedCorpus load_corpus(const CommonOpts& c) {
  LoadedCorpus out;
  if (!c.index.empty()) {
    std::string path = resolve_index_path(c.index);
    if (fs::exists(path)) {
      out.index = load_index(path);
      out.inputs.push_back({path, exporters::fnv1a_file(path)});
      return out;
    }
    if (c.input.empty())
      throw UserError("index cache not found: " + path + " (run 'commgen ingest' first)");
  }
  if (c.input.empty()) throw UserError("provide --input events or --index cache");
  out.index = build_index(read_events_file(c.input));
  out.inputs.push_back({c.input, exporters::fnv1a_file(c.input)});
  return out;
}

Eligibility resolve_eligibility(const CorpusIndex& index, const EligibilityOpts& e) {
  Eligibility out;
  out.min_members = e.min_members;
  out.created_after = e.created_after;
  if (e.created_until != 0) {
    out.created_until = e.created_until;
  } else {
    // leave a 3-month accumulation margin before the end of the data
    Timestamp last = index.posts.empty() ? 0 : index.posts.back().time;
    out.created_until = last - 90 * kSecondsPerDay;
  }
  if (out.created_after >= out.created_until)
    throw UserError("empty creation range; set --created-after/--created-until explicitly");
  return out;
}

std::vector<int> parse_k_list(const std::string& s) {
  std::vector<int> ks;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t comma = s.find(',', start);
    if (comma == std::string::npos) comma = s.size();
    if (comma > start) ks.push_back(std::stoi(s.substr(start, comma - start)));
    start = comma + 1;
  }
  if (ks.empty()) throw UserError("empty k list");
  for (std::size_t i = 1; i < ks.size(); ++i)
    if (ks[i] <= ks[i - 1]) throw UserError("k list must be strictly ascending");
  return ks;
}

std::string out_path(const CommonOpts& c, const std::string& name) {
  fs::create_directories(c.out_dir);
  return (fs::path(c.out_dir) / name).string();
}

void add_common(CLI::App* cmd, CommonOpts& c, bool with_input = true) {
  if (with_input) {
    cmd->add_option("--input", c.input, "event log file");
    cmd->add_option("--index", c.index,
                    "index cache file (COMMGEN_CACHE_DIR resolves relative paths)");
  }
  cmd->add_option("--out-dir", c.out_dir, "output directory");
  cmd->add_option("--workers", c.workers, "worker threads (0: library default)");
}

void add_eligibility(CLI::App* cmd, EligibilityOpts& e) {
  cmd->add_option("--min-members", e.min_members, "community member threshold (strictly more)");
  cmd->add_option("--created-after", e.created_after,
                  "earliest creation time, exclusive (epoch s)");
  cmd->add_option("--created-until", e.created_until,
                  "latest creation time, inclusive (epoch s; default: data end - 90 days)");
}

std::map<std::string, std::string> base_config(const CommonOpts& c) {
  return {{"input", c.input},
          {"index", c.index},
          {"out_dir", c.out_dir},
          {"workers", std::to_string(c.workers)}};
}

void merge_eligibility(std::map<std::string, std::string>& cfg, const Eligibility& e) {
  cfg["min_members"] = std::to_string(e.min_members);
  cfg["created_after"] = std::to_string(e.created_after);
  cfg["created_until"] = std::to_string(e.created_until);
}

// Shared by growth-eval and early-eval: protocol runs for all features and
// each feature family, paired Wilcoxon comparisons against "all", exports.
void run_eval(const CommonOpts& common, const std::string& dataset_path, bool rate_task,
              int repeats, std::uint64_t seed, const std::string& stem,
              const std::vector<std::pair<std::string, std::vector<std::size_t>>>& families,
              const Dataset& ds) {
  const ml::ModelKind kind = rate_task ? ml::ModelKind::ridge : ml::ModelKind::logistic;
  ml::ProtocolParams params;
  params.repeats = repeats;
  params.seed = seed;

  ml::Problem all = ml::make_problem(ds, rate_task);
  ml::EvalReport report = ml::run_protocol(all, kind, params);

  std::vector<std::string> outputs;
  const std::string runs_path = out_path(common, stem + "_runs.tsv");
  const std::string coeffs_path = out_path(common, stem + "_coeffs.tsv");
  exporters::write_eval_runs_tsv(runs_path, report);
  exporters::write_eval_coeffs_tsv(coeffs_path, report);
  outputs.push_back(runs_path);
  outputs.push_back(coeffs_path);

  std::vector<exporters::Comparison> comparisons;
  auto all_metrics = report.per_run_metrics();
  for (const auto& [family, cols] : families) {
    if (cols.empty()) continue;
    ml::Problem sub = ml::make_problem(ds, rate_task, cols);
    ml::EvalReport fam_report = ml::run_protocol(sub, kind, params);
    exporters::Comparison cmp;
    cmp.set_a = "all";
    cmp.set_b = family;
    cmp.mean_a = report.metric_mean;
    cmp.mean_b = fam_report.metric_mean;
    cmp.test = stats::wilcoxon_signed_rank(all_metrics, fam_report.per_run_metrics());
    comparisons.push_back(std::move(cmp));
  }
  const std::string cmp_path = out_path(common, stem + "_comparisons.tsv");
  exporters::write_comparisons_tsv(cmp_path, comparisons);
  outputs.push_back(cmp_path);

  auto significance = exporters::significance_table(ds);
  const std::string sig_path = out_path(common, stem + "_significance.tsv");
  if (ds.rate_target.empty())
    exporters::write_significance_tsv(sig_path, significance, "early_member", "");
  else
    exporters::write_significance_tsv(sig_path, significance, "growth_classification",
                                      "rate_regression");
  outputs.push_back(sig_path);

  std::map<std::string, std::string> cfg = base_config(common);
  cfg["dataset"] = dataset_path;
  cfg["task"] = rate_task ? "rate" : "classify";
  cfg["repeats"] = std::to_string(repeats);
  cfg["seed"] = std::to_string(seed);
  std::vector<exporters::ManifestInput> inputs{
      {dataset_path, exporters::fnv1a_file(dataset_path)}};
  exporters::write_manifest(common.out_dir, stem, cfg, inputs, outputs);

  std::cout << stem << ": " << (rate_task ? "mse" : "accuracy") << " mean "
            << report.metric_mean << " se " << report.metric_se << " over "
            << report.runs.size() << " runs\n";
}

int run(int argc, char** argv) {
  CLI::App app{"community genealogy pipeline"};
  app.require_subcommand(1);

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus with ground truth");
  CommonOpts synth_common;
  std::string synth_plan = "genealogy";
  std::uint64_t synth_seed = 1;
  std::string synth_out = "events.tsv", synth_truth = "truth.json";
  add_common(synth, synth_common, false);
  synth->add_option("--plan", synth_plan, "genealogy|growth|early")
      ->check(CLI::IsMember({"genealogy", "growth", "early"}));
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--out", synth_out, "event file name");
  synth->add_option("--truth", synth_truth, "ground-truth sidecar name");
  synth->callback([&] {
    SynthConfig cfg = synth_plan == "growth"
                          ? make_growth_plan(synth_seed)
                          : synth_plan == "early" ? make_early_plan(synth_seed)
                                                  : make_genealogy_plan(synth_seed);
    SynthResult res = generate_corpus(cfg);
    const std::string events_path = out_path(synth_common, synth_out);
    const std::string truth_path = out_path(synth_common, synth_truth);
    write_events_file(events_path, res.events);
    write_ground_truth(truth_path, cfg, res.truth);
    auto cfgmap = base_config(synth_common);
    cfgmap["plan"] = synth_plan;
    cfgmap["seed"] = std::to_string(synth_seed);
    std::vector<std::string> outputs{events_path, truth_path};
    exporters::write_manifest(synth_common.out_dir, "synth", cfgmap, {}, outputs);
    std::cout << "synth: " << res.events.size() << " events, "
              << res.truth.children.size() << " tracked communities\n";
  });

  // ---- ingest ----
  auto* ingest = app.add_subcommand("ingest", "parse events and build the index cache");
  CommonOpts ingest_common;
  add_common(ingest, ingest_common);
  ingest->callback([&] {
    apply_workers(ingest_common.workers);
    if (ingest_common.input.empty()) throw UserError("ingest needs --input");
    if (ingest_common.index.empty()) throw UserError("ingest needs --index to save to");
    ParseStats st;
    auto events = read_events_file(ingest_common.input, &st);
    CorpusIndex index = build_index(events);
    const std::string path = resolve_index_path(ingest_common.index);
    if (fs::path(path).has_parent_path())
      fs::create_directories(fs::path(path).parent_path());
    save_index(index, path);
    auto cfg = base_config(ingest_common);
    cfg["skipped_lines"] = std::to_string(st.skipped);
    std::vector<exporters::ManifestInput> inputs{
        {ingest_common.input, exporters::fnv1a_file(ingest_common.input)}};
    std::vector<std::string> outputs{path};
    exporters::write_manifest(ingest_common.out_dir, "ingest", cfg, inputs, outputs);
    std::cout << "ingest: " << events.size() << " events (" << st.skipped << " skipped), "
              << index.community_names.size() << " communities, "
              << index.user_names.size() << " users -> " << path << "\n";
  });

  // ---- genealogy ----
  auto* genealogy =
      app.add_subcommand("genealogy", "edges and parent stats for eligible children");
  CommonOpts gen_common;
  EligibilityOpts gen_elig;
  int gen_k = 100;
  double gen_window_days = 30.0, gen_edge_filter = 0.0;
  add_common(genealogy, gen_common);
  add_eligibility(genealogy, gen_elig);
  genealogy->add_option("--k", gen_k, "number of early members");
  genealogy->add_option("--window-days", gen_window_days, "recency window in days");
  genealogy->add_option("--edge-filter", gen_edge_filter,
                        "drop edges with weight <= this when exporting");
  genealogy->callback([&] {
    apply_workers(gen_common.workers);
    auto loaded = load_corpus(gen_common);
    Eligibility elig = resolve_eligibility(loaded.index, gen_elig);
    auto children = eligible_children(loaded.index, elig);
    GenealogyParams params;
    params.k = gen_k;
    params.window = static_cast<Duration>(gen_window_days * kSecondsPerDay);
    std::vector<CommunityId> usable;
    for (CommunityId c : children)
      if (loaded.index.member_count(c) >= static_cast<std::size_t>(gen_k)) usable.push_back(c);
    auto genealogies = genealogy_for_children(loaded.index, usable, params);
    const std::string edges_path =
        out_path(gen_common, "edges_k" + std::to_string(gen_k) + ".tsv");
    const std::string stats_path =
        out_path(gen_common, "parent_stats_k" + std::to_string(gen_k) + ".tsv");
    exporters::write_edges_tsv(edges_path, loaded.index, genealogies, gen_k, gen_edge_filter);
    exporters::write_parent_stats_tsv(stats_path, loaded.index, genealogies);
    auto cfg = base_config(gen_common);
    merge_eligibility(cfg, elig);
    cfg["k"] = std::to_string(gen_k);
    cfg["window_days"] = std::to_string(gen_window_days);
    cfg["edge_filter"] = std::to_string(gen_edge_filter);
    std::vector<std::string> outputs{edges_path, stats_path};
    exporters::write_manifest(gen_common.out_dir, "genealogy", cfg, loaded.inputs, outputs);
    std::cout << "genealogy: " << usable.size() << " children -> " << edges_path << "\n";
  });

  // ---- emergence / timeseries ----
  auto* emergence = app.add_subcommand("emergence", "per-k property means over children");
  auto* timeseries = app.add_subcommand("timeseries", "per-creation-bucket property means");
  CommonOpts em_common, ts_common;
  EligibilityOpts em_elig, ts_elig;
  std::string em_klist = "10,20,30,40,50,60,70,80,90,100";
  std::string ts_klist = "100";
  double em_window_days = 30.0, ts_window_days = 30.0, ts_bucket_days = 30.0;
  add_common(emergence, em_common);
  add_eligibility(emergence, em_elig);
  emergence->add_option("--k-list", em_klist, "comma-separated ascending k values");
  emergence->add_option("--window-days", em_window_days, "recency window in days");
  add_common(timeseries, ts_common);
  add_eligibility(timeseries, ts_elig);
  timeseries->add_option("--k-list", ts_klist, "comma-separated ascending k values");
  timeseries->add_option("--window-days", ts_window_days, "recency window in days");
  timeseries->add_option("--bucket-days", ts_bucket_days, "creation-time bucket in days");

  emergence->callback([&] {
    apply_workers(em_common.workers);
    auto loaded = load_corpus(em_common);
    Eligibility elig = resolve_eligibility(loaded.index, em_elig);
    auto children = eligible_children(loaded.index, elig);
    GenealogyParams params;
    params.window = static_cast<Duration>(em_window_days * kSecondsPerDay);
    auto ks = parse_k_list(em_klist);
    auto points = emergence_summary(loaded.index, children, ks, params);
    const std::string path = out_path(em_common, "emergence.tsv");
    exporters::write_series_tsv(path, points, false);
    auto cfg = base_config(em_common);
    merge_eligibility(cfg, elig);
    cfg["k_list"] = em_klist;
    cfg["window_days"] = std::to_string(em_window_days);
    std::vector<std::string> outputs{path};
    exporters::write_manifest(em_common.out_dir, "emergence", cfg, loaded.inputs, outputs);
    std::cout << "emergence: " << children.size() << " children -> " << path << "\n";
  });

  timeseries->callback([&] {
    apply_workers(ts_common.workers);
    auto loaded = load_corpus(ts_common);
    Eligibility elig = resolve_eligibility(loaded.index, ts_elig);
    auto children = eligible_children(loaded.index, elig);
    GenealogyParams params;
    params.window = static_cast<Duration>(ts_window_days * kSecondsPerDay);
    auto ks = parse_k_list(ts_klist);
    auto points = property_time_series(
        loaded.index, children, ks,
        static_cast<Duration>(ts_bucket_days * kSecondsPerDay), params);
    const std::string path = out_path(ts_common, "timeseries.tsv");
    exporters::write_series_tsv(path, points, true);
    auto cfg = base_config(ts_common);
    merge_eligibility(cfg, elig);
    cfg["k_list"] = ts_klist;
    cfg["window_days"] = std::to_string(ts_window_days);
    cfg["bucket_days"] = std::to_string(ts_bucket_days);
    std::vector<std::string> outputs{path};
    exporters::write_manifest(ts_common.out_dir, "timeseries", cfg, loaded.inputs, outputs);
    std::cout << "timeseries: " << points.size() << " points -> " << path << "\n";
  });

  // ---- growth-dataset ----
  auto* gd = app.add_subcommand("growth-dataset", "growth features and targets per child");
  CommonOpts gd_common;
  EligibilityOpts gd_elig;
  int gd_k = 100;
  double gd_window_days = 30.0, gd_alpha = 0.01;
  std::size_t gd_lm_min = 100;
  add_common(gd, gd_common);
  add_eligibility(gd, gd_elig);
  gd->add_option("--k", gd_k, "number of early members");
  gd->add_option("--window-days", gd_window_days, "recency window in days");
  gd->add_option("--alpha", gd_alpha, "LM smoothing mass");
  gd->add_option("--lm-min-members", gd_lm_min, "unique members needed for a parent LM");
  gd->callback([&] {
    apply_workers(gd_common.workers);
    auto loaded = load_corpus(gd_common);
    Eligibility elig = resolve_eligibility(loaded.index, gd_elig);
    auto children = eligible_children(loaded.index, elig);
    GrowthParams params;
    params.genealogy.k = gd_k;
    params.genealogy.window = static_cast<Duration>(gd_window_days * kSecondsPerDay);
    params.lang.alpha = gd_alpha;
    params.lang.min_unique_members = gd_lm_min;
    params.base_members = elig.min_members;
    std::size_t skipped = 0;
    Dataset ds = build_growth_dataset(loaded.index, children, params, &skipped);
    const std::string path = out_path(gd_common, "growth_k" + std::to_string(gd_k) + ".tsv");
    write_dataset_tsv(path, ds);
    auto cfg = base_config(gd_common);
    merge_eligibility(cfg, elig);
    cfg["k"] = std::to_string(gd_k);
    cfg["window_days"] = std::to_string(gd_window_days);
    cfg["alpha"] = std::to_string(gd_alpha);
    cfg["lm_min_members"] = std::to_string(gd_lm_min);
    cfg["median_size"] = std::to_string(empirical_median_size(loaded.index, children));
    cfg["skipped_children"] = std::to_string(skipped);
    std::vector<std::string> outputs{path};
    exporters::write_manifest(gd_common.out_dir, "growth-dataset", cfg, loaded.inputs,
                              outputs);
    std::cout << "growth-dataset: " << ds.rows() << " rows -> " << path << "\n";
  });

  // ---- growth-eval ----
  auto* ge = app.add_subcommand("growth-eval", "repeated-split evaluation on a growth dataset");
  CommonOpts ge_common;
  std::string ge_dataset, ge_task = "classify";
  int ge_repeats = 30;
  std::uint64_t ge_seed = 0;
  add_common(ge, ge_common, false);
  ge->add_option("--dataset", ge_dataset, "growth dataset TSV")->required();
  ge->add_option("--task", ge_task, "classify|rate")
      ->check(CLI::IsMember({"classify", "rate"}));
  ge->add_option("--repeats", ge_repeats, "protocol repeats");
  ge->add_option("--seed", ge_seed, "protocol seed");
  ge->callback([&] {
    apply_workers(ge_common.workers);
    if (!fs::exists(ge_dataset))
      throw UserError("missing dataset: " + ge_dataset +
                      " (run 'commgen growth-dataset' first)");
    Dataset ds = read_dataset_tsv(ge_dataset);
    auto families = growth_feature_families(ds.feature_names);
    run_eval(ge_common, ge_dataset, ge_task == "rate", ge_repeats, ge_seed,
             ge_task == "rate" ? "growth_eval_rate" : "growth_eval_classify", families, ds);
  });

  // ---- early-dataset ----
  auto* ed = app.add_subcommand("early-dataset", "matched-pair dataset for early members");
  CommonOpts ed_common;
  EligibilityOpts ed_elig;
  int ed_k = 100;
  double ed_window_days = 30.0, ed_alpha = 0.01;
  std::size_t ed_tuples = 10000;
  std::uint64_t ed_seed = 0;
  std::int64_t ed_max_distance = 5;
  add_common(ed, ed_common);
  add_eligibility(ed, ed_elig);
  ed->add_option("--k", ed_k, "number of early members");
  ed->add_option("--window-days", ed_window_days, "recency window in days");
  ed->add_option("--alpha", ed_alpha, "LM smoothing mass");
  ed->add_option("--tuples", ed_tuples, "number of (parent, child) tuples to sample");
  ed->add_option("--seed", ed_seed, "tuple sampling seed");
  ed->add_option("--max-match-distance", ed_max_distance, "post-count matching cutoff");
  ed->callback([&] {
    apply_workers(ed_common.workers);
    auto loaded = load_corpus(ed_common);
    Eligibility elig = resolve_eligibility(loaded.index, ed_elig);
    auto children = eligible_children(loaded.index, elig);
    std::vector<CommunityId> usable;
    for (CommunityId c : children)
      if (loaded.index.member_count(c) >= static_cast<std::size_t>(ed_k)) usable.push_back(c);
    EarlyParams params;
    params.genealogy.k = ed_k;
    params.genealogy.window = static_cast<Duration>(ed_window_days * kSecondsPerDay);
    params.lang.alpha = ed_alpha;
    params.num_tuples = ed_tuples;
    params.seed = ed_seed;
    params.max_match_distance = ed_max_distance;
    EarlyBuildInfo info;
    Dataset ds = build_early_dataset(loaded.index, usable, params, &info);
    const std::string path = out_path(ed_common, "early_k" + std::to_string(ed_k) + ".tsv");
    write_dataset_tsv(path, ds);
    auto cfg = base_config(ed_common);
    merge_eligibility(cfg, elig);
    cfg["k"] = std::to_string(ed_k);
    cfg["window_days"] = std::to_string(ed_window_days);
    cfg["alpha"] = std::to_string(ed_alpha);
    cfg["tuples"] = std::to_string(ed_tuples);
    cfg["seed"] = std::to_string(ed_seed);
    cfg["max_match_distance"] = std::to_string(ed_max_distance);
    cfg["pairs_kept"] = std::to_string(info.pairs_kept);
    cfg["dropped_no_match"] = std::to_string(info.dropped_no_match);
    cfg["dropped_no_activity"] = std::to_string(info.dropped_no_activity);
    std::vector<std::string> outputs{path};
    exporters::write_manifest(ed_common.out_dir, "early-dataset", cfg, loaded.inputs, outputs);
    std::cout << "early-dataset: " << ds.rows() << " rows (" << info.pairs_kept
              << " pairs) -> " << path << "\n";
  });

  // ---- early-eval ----
  auto* ee = app.add_subcommand("early-eval", "repeated-split evaluation on an early dataset");
  CommonOpts ee_common;
  std::string ee_dataset;
  int ee_repeats = 30;
  std::uint64_t ee_seed = 0;
  add_common(ee, ee_common, false);
  ee->add_option("--dataset", ee_dataset, "early dataset TSV")->required();
  ee->add_option("--repeats", ee_repeats, "protocol repeats");
  ee->add_option("--seed", ee_seed, "protocol seed");
  ee->callback([&] {
    apply_workers(ee_common.workers);
    if (!fs::exists(ee_dataset))
      throw UserError("missing dataset: " + ee_dataset +
                      " (run 'commgen early-dataset' first)");
    Dataset ds = read_dataset_tsv(ee_dataset);
    auto families = early_feature_families(ds.feature_names);
    run_eval(ee_common, ee_dataset, false, ee_repeats, ee_seed, "early_eval", families, ds);
  });

  // ---- export ----
  auto* ex = app.add_subcommand("export", "re-emit display tables from staged artifacts");
  CommonOpts ex_common;
  std::string ex_kind, ex_in, ex_out;
  double ex_edge_filter = 0.01;
  add_common(ex, ex_common, false);
  ex->add_option("--kind", ex_kind, "edges|significance")
      ->required()
      ->check(CLI::IsMember({"edges", "significance"}));
  ex->add_option("--in", ex_in, "staged artifact (edge list or dataset TSV)")->required();
  ex->add_option("--out", ex_out, "output file name")->required();
  ex->add_option("--edge-filter", ex_edge_filter, "weight display filter for --kind edges");
  ex->callback([&] {
    if (!fs::exists(ex_in))
      throw UserError("missing upstream artifact: " + ex_in +
                      " (run the producing stage first)");
    const std::string path = out_path(ex_common, ex_out);
    std::vector<std::string> outputs{path};
    if (ex_kind == "edges") {
      std::ifstream in(ex_in);
      std::ofstream out(path, std::ios::binary);
      if (!out) throw UserError("cannot open for writing: " + path);
      std::string line;
      if (!std::getline(in, line)) throw DataError("empty edge list: " + ex_in);
      out << line << '\n';
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        // columns: parent, child, weight, k
        std::size_t a = line.find('\t'), b = line.find('\t', a + 1),
                    c = line.find('\t', b + 1);
        if (a == std::string::npos || b == std::string::npos || c == std::string::npos)
          throw DataError("bad edge row in " + ex_in);
        double w = std::stod(line.substr(b + 1, c - b - 1));
        if (w > ex_edge_filter) out << line << '\n';
      }
    } else {
      Dataset ds = read_dataset_tsv(ex_in);
      auto rows = exporters::significance_table(ds);
      if (ds.rate_target.empty())
        exporters::write_significance_tsv(path, rows, "early_member", "");
      else
        exporters::write_significance_tsv(path, rows, "growth_classification",
                                          "rate_regression");
    }
    auto cfg = base_config(ex_common);
    cfg["kind"] = ex_kind;
    cfg["in"] = ex_in;
    cfg["edge_filter"] = std::to_string(ex_edge_filter);
    std::vector<exporters::ManifestInput> inputs{{ex_in, exporters::fnv1a_file(ex_in)}};
    exporters::write_manifest(ex_common.out_dir, "export", cfg, inputs, outputs);
    std::cout << "export: " << path << "\n";
  });

  CLI11_PARSE(app, argc, argv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UserError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
