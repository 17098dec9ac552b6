#include "commgen/growth.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <unordered_set>

namespace commgen {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t lower_bound_time(const CorpusIndex& index, const std::vector<std::uint32_t>& posts,
                             Timestamp t) {
  return std::lower_bound(posts.begin(), posts.end(), t,
                          [&](std::uint32_t pi, Timestamp v) {
                            return index.posts[pi].time < v;
                          }) -
         posts.begin();
}

// Distinct users posting in `community` within [t0, t1).
std::size_t active_member_count(const CorpusIndex& index, CommunityId community, Timestamp t0,
                                Timestamp t1) {
  const auto& posts = index.community_data[community].posts;
  std::size_t lo = lower_bound_time(index, posts, t0);
  std::size_t hi = lower_bound_time(index, posts, t1);
  std::unordered_set<UserId> users;
  for (std::size_t i = lo; i < hi; ++i) users.insert(index.posts[posts[i]].user);
  return users.size();
}

std::string threshold_feature_name(double thr) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "num_parents_w_ge_%g", thr);
  return buf;
}

}  // namespace

std::size_t empirical_median_size(const CorpusIndex& index,
                                  std::span<const CommunityId> eligible) {
  if (eligible.empty()) throw UserError("median size of an empty community set is undefined");
  std::vector<std::size_t> sizes;
  sizes.reserve(eligible.size());
  for (CommunityId c : eligible) sizes.push_back(index.member_count(c));
  std::sort(sizes.begin(), sizes.end());
  return sizes[(sizes.size() - 1) / 2];  // lower median on even counts
}

GrowthTargets growth_targets(const CorpusIndex& index, CommunityId child,
                             std::size_t median_size, std::size_t base_members) {
  const auto& members = index.community_data[child].members;
  if (members.size() < base_members)
    throw UserError("growth targets need at least base_members members");
  GrowthTargets t;
  t.label = members.size() > median_size;
  t.rate_target = kNaN;
  if (t.label) {
    Timestamp t_base = members[base_members - 1].first_post;
    Timestamp t_median = members[median_size - 1].first_post;
    Duration gap = t_median - t_base;
    if (gap <= 0)
      throw DataError("non-positive growth gap: median member does not follow base member");
    t.rate_target = std::log(static_cast<double>(gap));
  }
  return t;
}

std::vector<std::string> growth_feature_names(const GrowthParams& params) {
  std::vector<std::string> names = {"creation_time", "avg_time_gap", "num_parents"};
  for (double thr : params.genealogy.weight_thresholds)
    names.push_back(threshold_feature_name(thr));
  names.insert(names.end(),
               {"max_parent_weight", "mean_parent_weight", "std_parent_weight",
                "parent_size_avg", "parent_size_min", "parent_size_max", "parent_size_std",
                "parent_size_wavg", "parent_lang_dist_avg", "parent_lang_dist_max",
                "parent_lang_dist_std", "lang_missing", "parent_meta_missing",
                "fraction_new_users"});
  return names;
}

std::vector<double> extract_growth_features(const CorpusIndex& index, CommunityId child,
                                            const ChildGenealogy& genealogy,
                                            const GrowthParams& params) {
  const int k = params.genealogy.k;
  const auto& members = index.community_data[child].members;
  if (members.size() < static_cast<std::size_t>(k))
    throw UserError("community has fewer than k members");

  std::vector<double> f;
  f.reserve(19);

  // temporal
  const Timestamp created = index.creation_time(child);
  f.push_back(static_cast<double>(created));
  double gap = 0;
  if (k > 1)
    gap = static_cast<double>(members[k - 1].first_post - members[0].first_post) /
          static_cast<double>(k - 1);
  f.push_back(gap);

  // basic parent properties
  const auto& edges = genealogy.edges;
  f.push_back(static_cast<double>(genealogy.stats.num_parents));
  for (const auto& [thr, cnt] : genealogy.stats.num_parents_weight_at_least)
    f.push_back(static_cast<double>(cnt));
  f.push_back(genealogy.stats.max_parent_weight);
  double w_mean = 0, w_std = 0;
  if (!edges.empty()) {
    for (const auto& e : edges) w_mean += e.weight;
    w_mean /= static_cast<double>(edges.size());
    for (const auto& e : edges) w_std += (e.weight - w_mean) * (e.weight - w_mean);
    w_std = std::sqrt(w_std / static_cast<double>(edges.size()));
  }
  f.push_back(w_mean);
  f.push_back(w_std);

  // meta information of parents: log of the parents' active-member counts in
  // the window before the child's creation. Parents with no activity in that
  // window have no measurable size and are left out; if none remain the whole
  // family is missing.
  std::vector<double> log_sizes;
  std::vector<double> size_weights;
  for (const auto& e : edges) {
    std::size_t active =
        active_member_count(index, e.parent, created - params.genealogy.window, created);
    if (active == 0) continue;
    log_sizes.push_back(std::log(static_cast<double>(active)));
    size_weights.push_back(e.weight);
  }
  if (!log_sizes.empty()) {
    double avg = 0, mn = log_sizes[0], mx = log_sizes[0], sd = 0, wsum = 0, wavg = 0;
    for (std::size_t i = 0; i < log_sizes.size(); ++i) {
      avg += log_sizes[i];
      mn = std::min(mn, log_sizes[i]);
      mx = std::max(mx, log_sizes[i]);
      wsum += size_weights[i];
      wavg += size_weights[i] * log_sizes[i];
    }
    avg /= static_cast<double>(log_sizes.size());
    for (double v : log_sizes) sd += (v - avg) * (v - avg);
    sd = std::sqrt(sd / static_cast<double>(log_sizes.size()));
    wavg /= wsum;
    f.insert(f.end(), {avg, mn, mx, sd, wavg});
  } else {
    f.insert(f.end(), {kNaN, kNaN, kNaN, kNaN, kNaN});
  }
  const bool meta_missing = log_sizes.empty();

  auto lang = parent_language_stats(index, child, edges, params.genealogy.window, params.lang);
  if (lang) {
    f.insert(f.end(), {lang->avg, lang->max, lang->stddev});
  } else {
    f.insert(f.end(), {kNaN, kNaN, kNaN});
  }
  f.push_back(lang ? 0.0 : 1.0);          // lang_missing
  f.push_back(meta_missing ? 1.0 : 0.0);  // parent_meta_missing

  // new user
  f.push_back(genealogy.stats.fraction_new_users);
  return f;
}

Dataset build_growth_dataset(const CorpusIndex& index, std::span<const CommunityId> eligible,
                             const GrowthParams& params, std::size_t* skipped) {
  const std::size_t median = empirical_median_size(index, eligible);
  const int k = params.genealogy.k;

  std::vector<CommunityId> usable;
  for (CommunityId c : eligible)
    if (index.member_count(c) >= static_cast<std::size_t>(k)) usable.push_back(c);
  if (skipped) *skipped = eligible.size() - usable.size();

  Dataset ds;
  ds.id_columns = {"child"};
  ds.feature_names = growth_feature_names(params);
  ds.ids.resize(usable.size());
  ds.label.resize(usable.size());
  ds.rate_target.resize(usable.size());
  ds.x.resize(usable.size() * ds.feature_names.size());

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(usable.size()); ++i) {
    const CommunityId child = usable[i];
    ChildGenealogy g = parent_edges(index, child, params.genealogy);
    std::vector<double> f = extract_growth_features(index, child, g, params);
    GrowthTargets t = growth_targets(index, child, median, params.base_members);
    ds.ids[i] = {index.community_names[child]};
    ds.label[i] = t.label ? 1.0 : 0.0;
    ds.rate_target[i] = t.rate_target;
    std::copy(f.begin(), f.end(), ds.x.begin() + i * static_cast<std::ptrdiff_t>(f.size()));
  }
  return ds;
}

std::vector<std::pair<std::string, std::vector<std::size_t>>> growth_feature_families(
    std::span<const std::string> names) {
  std::vector<std::pair<std::string, std::vector<std::size_t>>> fams = {
      {"temporal", {}}, {"parent_basic", {}}, {"parent_meta", {}}, {"new_user", {}}};
  for (std::size_t i = 0; i < names.size(); ++i) {
    const std::string& n = names[i];
    if (n == "creation_time" || n == "avg_time_gap")
      fams[0].second.push_back(i);
    else if (n == "num_parents" || n.starts_with("num_parents_w_ge_") ||
             n.ends_with("parent_weight"))
      fams[1].second.push_back(i);
    else if (n == "fraction_new_users")
      fams[3].second.push_back(i);
    else
      fams[2].second.push_back(i);
  }
  return fams;
}

}  // namespace commgen
