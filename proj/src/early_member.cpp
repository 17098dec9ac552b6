#include "commgen/early_member.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include "commgen/rng.hpp"

namespace commgen {

namespace {

std::size_t lower_bound_time(const CorpusIndex& index, const std::vector<std::uint32_t>& posts,
                             Timestamp t) {
  return std::lower_bound(posts.begin(), posts.end(), t,
                          [&](std::uint32_t pi, Timestamp v) {
                            return index.posts[pi].time < v;
                          }) -
         posts.begin();
}

// Post counts per user in `community` over [t0, t1), ordered by user id.
std::map<UserId, std::int64_t> window_post_counts(const CorpusIndex& index,
                                                  CommunityId community, Timestamp t0,
                                                  Timestamp t1) {
  const auto& posts = index.community_data[community].posts;
  std::size_t lo = lower_bound_time(index, posts, t0);
  std::size_t hi = lower_bound_time(index, posts, t1);
  std::map<UserId, std::int64_t> counts;
  for (std::size_t i = lo; i < hi; ++i) ++counts[index.posts[posts[i]].user];
  return counts;
}

// Lower median of the feedback values of all posts in `community` over
// [t0, t1). The caller guarantees at least one post in range.
std::int64_t median_feedback(const CorpusIndex& index, CommunityId community, Timestamp t0,
                             Timestamp t1) {
  const auto& posts = index.community_data[community].posts;
  std::size_t lo = lower_bound_time(index, posts, t0);
  std::size_t hi = lower_bound_time(index, posts, t1);
  std::vector<std::int64_t> fb;
  fb.reserve(hi - lo);
  for (std::size_t i = lo; i < hi; ++i) fb.push_back(index.posts[posts[i]].feedback);
  std::sort(fb.begin(), fb.end());
  return fb[(fb.size() - 1) / 2];
}

}  // namespace

std::vector<GenealogyEdge> sample_tuples(std::span<const GenealogyEdge> edges, std::size_t n,
                                         std::uint64_t seed) {
  std::vector<GenealogyEdge> out(edges.begin(), edges.end());
  if (out.size() <= n) return out;
  Rng rng(seed);
  // partial Fisher-Yates: the first n slots end up a uniform sample
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.below(out.size() - i));
    std::swap(out[i], out[j]);
  }
  out.resize(n);
  return out;
}

std::optional<UserId> match_negative(const CorpusIndex& index, UserId positive,
                                     CommunityId parent, CommunityId child, int k,
                                     Duration window, std::int64_t max_distance) {
  const auto& members = index.community_data[child].members;
  if (members.size() < static_cast<std::size_t>(k))
    throw UserError("child has fewer than k members");

  Timestamp match_time = 0;
  std::unordered_set<UserId> early;
  early.reserve(k);
  bool found = false;
  for (int r = 0; r < k; ++r) {
    early.insert(members[r].user);
    if (members[r].user == positive) {
      match_time = members[r].first_post;
      found = true;
    }
  }
  if (!found) throw UserError("positive user is not among the child's first k members");

  auto counts = window_post_counts(index, parent, match_time - window, match_time);
  auto pos_it = counts.find(positive);
  if (pos_it == counts.end())
    throw UserError("positive user has no recent posts in the parent");
  const std::int64_t target = pos_it->second;

  std::optional<UserId> best;
  std::int64_t best_dist = 0;
  for (const auto& [user, cnt] : counts) {  // ascending user id == name order
    if (early.contains(user)) continue;
    std::int64_t dist = std::llabs(cnt - target);
    if (!best || dist < best_dist) {
      best = user;
      best_dist = dist;
    }
  }
  if (!best || best_dist > max_distance) return std::nullopt;
  return best;
}

std::vector<std::string> user_feature_names() {
  return {"parent_num_posts", "parent_avg_time_gap", "parent_feedback",
          "parent_lang_dist",  "parent_lang_dist_std",
          "global_num_posts",  "global_avg_time_gap", "global_feedback",
          "global_lang_dist",  "global_lang_dist_std",
          "fraction_in_parent", "community_entropy"};
}

namespace {

struct ScopeFeatures {
  double num_posts = 0;
  double avg_gap = 0;
  double feedback = 0;
  double lang_dist = 0;
  double lang_dist_std = 0;
};

// Features over one scope (a post subset sharing time order).
ScopeFeatures scope_features(const CorpusIndex& index, const std::vector<std::uint32_t>& posts,
                             const UnigramLM& lm, Duration window,
                             const std::map<CommunityId, std::int64_t>& medians) {
  ScopeFeatures f;
  f.num_posts = static_cast<double>(posts.size());
  if (posts.size() >= 2) {
    Timestamp first = index.posts[posts.front()].time;
    Timestamp last = index.posts[posts.back()].time;
    f.avg_gap = static_cast<double>(last - first) / static_cast<double>(posts.size() - 1);
  } else {
    f.avg_gap = static_cast<double>(window);
  }

  double fb = 0;
  for (std::uint32_t pi : posts) {
    const Post& p = index.posts[pi];
    fb += static_cast<double>(p.feedback - medians.at(p.community));
  }
  f.feedback = posts.empty() ? 0.0 : fb / static_cast<double>(posts.size());

  std::vector<TokenId> pooled;
  std::vector<double> per_post;
  for (std::uint32_t pi : posts) {
    auto span = index.post_tokens(index.posts[pi]);
    pooled.insert(pooled.end(), span.begin(), span.end());
    if (!span.empty()) per_post.push_back(cross_entropy(lm, span));
  }
  if (!pooled.empty()) f.lang_dist = cross_entropy(lm, pooled);
  if (per_post.size() >= 2) {
    double m = 0;
    for (double v : per_post) m += v;
    m /= static_cast<double>(per_post.size());
    double s = 0;
    for (double v : per_post) s += (v - m) * (v - m);
    f.lang_dist_std = std::sqrt(s / static_cast<double>(per_post.size()));
  }
  return f;
}

}  // namespace

std::optional<std::vector<double>> extract_user_features(const CorpusIndex& index, UserId user,
                                                         CommunityId parent, Timestamp t,
                                                         Duration window, double alpha) {
  if (window <= 0) throw UserError("window must be positive");
  const auto& all = index.user_data[user].posts;
  std::size_t lo = lower_bound_time(index, all, t - window);
  std::size_t hi = lower_bound_time(index, all, t);
  if (lo == hi) return std::nullopt;  // no activity in the window

  std::vector<std::uint32_t> global_posts(all.begin() + lo, all.begin() + hi);
  std::vector<std::uint32_t> parent_posts;
  std::map<CommunityId, std::int64_t> per_community;
  for (std::uint32_t pi : global_posts) {
    const Post& p = index.posts[pi];
    ++per_community[p.community];
    if (p.community == parent) parent_posts.push_back(pi);
  }

  std::map<CommunityId, std::int64_t> medians;
  for (const auto& [c, cnt] : per_community)
    medians.emplace(c, median_feedback(index, c, t - window, t));

  // Scope LMs: the parent community's model and a whole-corpus model over the
  // same interval. No sparsity floor here; a thin LM is still usable.
  UnigramLM parent_lm;
  if (auto lm = community_month_lm(index, parent, t - window, t, 0, alpha))
    parent_lm = std::move(*lm);
  UnigramLM global_lm = corpus_interval_lm(index, t - window, t, alpha);

  ScopeFeatures pf = scope_features(index, parent_posts, parent_lm, window, medians);
  ScopeFeatures gf = scope_features(index, global_posts, global_lm, window, medians);

  double fraction_in_parent =
      static_cast<double>(parent_posts.size()) / static_cast<double>(global_posts.size());
  double entropy = 0;
  const double n = static_cast<double>(global_posts.size());
  for (const auto& [c, cnt] : per_community) {
    double p = static_cast<double>(cnt) / n;
    entropy -= p * std::log2(p);
  }

  return std::vector<double>{pf.num_posts, pf.avg_gap, pf.feedback, pf.lang_dist,
                             pf.lang_dist_std, gf.num_posts, gf.avg_gap, gf.feedback,
                             gf.lang_dist, gf.lang_dist_std, fraction_in_parent, entropy};
}

Dataset build_early_dataset(const CorpusIndex& index, std::span<const CommunityId> children,
                            const EarlyParams& params, EarlyBuildInfo* info) {
  auto genealogies = genealogy_for_children(index, children, params.genealogy);
  std::vector<GenealogyEdge> all_edges;
  for (const auto& g : genealogies)
    all_edges.insert(all_edges.end(), g.edges.begin(), g.edges.end());
  if (all_edges.empty()) throw UserError("genealogy graph has no edges; cannot sample tuples");

  auto tuples = sample_tuples(all_edges, params.num_tuples, params.seed);

  struct Row {
    std::string pair_id;
    std::string user;
    std::vector<double> features;
    double label;
  };
  std::vector<std::vector<Row>> per_tuple(tuples.size());
  std::vector<EarlyBuildInfo> per_info(tuples.size());

  const int k = params.genealogy.k;
  const Duration window = params.genealogy.window;

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ti = 0; ti < static_cast<std::ptrdiff_t>(tuples.size()); ++ti) {
    const CommunityId parent = tuples[ti].parent;
    const CommunityId child = tuples[ti].child;
    const auto& members = index.community_data[child].members;
    EarlyBuildInfo& inf = per_info[ti];

    for (int r = 0; r < k; ++r) {
      const Member& m = members[r];
      // positives: early members recently active in this parent
      auto counts = window_post_counts(index, parent, m.first_post - window, m.first_post);
      if (!counts.contains(m.user)) continue;
      ++inf.positives_seen;

      auto negative =
          match_negative(index, m.user, parent, child, k, window, params.max_match_distance);
      if (!negative) {
        ++inf.dropped_no_match;
        continue;
      }
      auto pos_f = extract_user_features(index, m.user, parent, m.first_post, window,
                                         params.lang.alpha);
      auto neg_f = extract_user_features(index, *negative, parent, m.first_post, window,
                                         params.lang.alpha);
      if (!pos_f || !neg_f) {
        ++inf.dropped_no_activity;
        continue;
      }
      std::string pair_id = index.community_names[child] + ":" +
                            index.community_names[parent] + ":" + index.user_names[m.user];
      per_tuple[ti].push_back(Row{pair_id, index.user_names[m.user], std::move(*pos_f), 1.0});
      per_tuple[ti].push_back(
          Row{pair_id, index.user_names[*negative], std::move(*neg_f), 0.0});
      ++inf.pairs_kept;
    }
  }

  Dataset ds;
  ds.id_columns = {"pair_id", "user"};
  ds.feature_names = user_feature_names();
  EarlyBuildInfo total;
  total.tuples_used = tuples.size();
  for (std::size_t ti = 0; ti < per_tuple.size(); ++ti) {
    total.positives_seen += per_info[ti].positives_seen;
    total.pairs_kept += per_info[ti].pairs_kept;
    total.dropped_no_match += per_info[ti].dropped_no_match;
    total.dropped_no_activity += per_info[ti].dropped_no_activity;
    for (Row& row : per_tuple[ti]) {
      ds.ids.push_back({std::move(row.pair_id), std::move(row.user)});
      ds.x.insert(ds.x.end(), row.features.begin(), row.features.end());
      ds.label.push_back(row.label);
    }
  }
  if (info) *info = total;
  return ds;
}

std::vector<std::pair<std::string, std::vector<std::size_t>>> early_feature_families(
    std::span<const std::string> names) {
  std::vector<std::pair<std::string, std::vector<std::size_t>>> fams = {
      {"parent", {}}, {"global", {}}, {"interplay", {}}};
  for (std::size_t i = 0; i < names.size(); ++i) {
    const std::string& n = names[i];
    if (n.starts_with("parent_"))
      fams[0].second.push_back(i);
    else if (n.starts_with("global_"))
      fams[1].second.push_back(i);
    else
      fams[2].second.push_back(i);
  }
  return fams;
}

}  // namespace commgen
