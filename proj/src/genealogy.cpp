#include "commgen/genealogy.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace commgen {

namespace {

// First index in `posts` (time-sorted post ids) with time >= t.
std::size_t lower_bound_time(const CorpusIndex& index, const std::vector<std::uint32_t>& posts,
                             Timestamp t) {
  return std::lower_bound(posts.begin(), posts.end(), t,
                          [&](std::uint32_t pi, Timestamp v) {
                            return index.posts[pi].time < v;
                          }) -
         posts.begin();
}

void check_window(Duration window) {
  if (window <= 0) throw UserError("window must be positive");
}

// Distinct communities with a post by `user` in [t - window, t).
std::vector<CommunityId> recent_set(const CorpusIndex& index, UserId user, Timestamp t,
                                    Duration window) {
  const auto& posts = index.user_data[user].posts;
  std::size_t lo = lower_bound_time(index, posts, t - window);
  std::size_t hi = lower_bound_time(index, posts, t);
  std::vector<CommunityId> out;
  out.reserve(hi - lo);
  for (std::size_t i = lo; i < hi; ++i) out.push_back(index.posts[posts[i]].community);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

std::vector<CommunityId> recent_communities(const CorpusIndex& index, UserId user, Timestamp t,
                                            Duration window) {
  check_window(window);
  return recent_set(index, user, t, window);
}

std::vector<CommunityId> recent_communities(const CorpusIndex& index, std::string_view user,
                                            Timestamp t, Duration window) {
  check_window(window);
  auto id = index.find_user(user);
  if (!id) return {};
  return recent_set(index, *id, t, window);
}

namespace {

// Shared scan behind parent_edges and emergence_curve: walks the first kmax
// members once and snapshots edges/stats at each requested k. The recency of
// member r is evaluated at r's own first post in the child, so snapshots at
// growing k nest.
std::vector<ChildGenealogy> prefix_scan(const CorpusIndex& index, CommunityId child,
                                        std::span<const int> ks,
                                        const GenealogyParams& params) {
  if (ks.empty()) return {};
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] < 1) throw UserError("k must be at least 1");
    if (i > 0 && ks[i] <= ks[i - 1]) throw UserError("k values must be strictly ascending");
  }
  check_window(params.window);
  const CommunityRecord& rec = index.community_data[child];
  const int kmax = ks.back();
  if (rec.members.size() < static_cast<std::size_t>(kmax))
    throw UserError("community has fewer than k members (k=" + std::to_string(kmax) +
                    ", members=" + std::to_string(rec.members.size()) + ")");

  const Timestamp child_created = rec.creation_time;
  std::map<CommunityId, int> counts;  // ordered: edge output sorted by parent id
  int members_with_recent = 0;

  std::vector<ChildGenealogy> out;
  out.reserve(ks.size());
  std::size_t next_k = 0;

  for (int r = 0; r < kmax; ++r) {
    const Member& m = rec.members[r];
    // Only communities created strictly before the child can be parents; the
    // same filtered set drives fraction_new_users so the weight/new-user
    // coupling invariants hold.
    bool any = false;
    for (CommunityId c : recent_set(index, m.user, m.first_post, params.window)) {
      if (index.community_data[c].creation_time >= child_created) continue;
      ++counts[c];
      any = true;
    }
    if (any) ++members_with_recent;

    while (next_k < ks.size() && r + 1 == ks[next_k]) {
      const int k = ks[next_k];
      ChildGenealogy g;
      g.stats.child = child;
      g.stats.k = k;
      g.stats.fraction_new_users = 1.0 - static_cast<double>(members_with_recent) / k;
      g.edges.reserve(counts.size());
      for (const auto& [parent, cnt] : counts) {
        double w = static_cast<double>(cnt) / k;
        g.edges.push_back(GenealogyEdge{parent, child, w});
        g.stats.max_parent_weight = std::max(g.stats.max_parent_weight, w);
      }
      g.stats.num_parents = static_cast<int>(g.edges.size());
      for (double thr : params.weight_thresholds) {
        int c = 0;
        for (const auto& e : g.edges)
          if (e.weight >= thr) ++c;
        g.stats.num_parents_weight_at_least.emplace_back(thr, c);
      }
      out.push_back(std::move(g));
      ++next_k;
    }
  }
  return out;
}

}  // namespace

ChildGenealogy parent_edges(const CorpusIndex& index, CommunityId child,
                            const GenealogyParams& params) {
  int ks[1] = {params.k};
  return std::move(prefix_scan(index, child, ks, params).front());
}

std::vector<ChildGenealogy> emergence_curve(const CorpusIndex& index, CommunityId child,
                                            std::span<const int> ks,
                                            const GenealogyParams& params) {
  return prefix_scan(index, child, ks, params);
}

std::vector<ChildGenealogy> genealogy_for_children(const CorpusIndex& index,
                                                   std::span<const CommunityId> children,
                                                   const GenealogyParams& params) {
  std::vector<ChildGenealogy> out(children.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(children.size()); ++i)
    out[i] = parent_edges(index, children[i], params);
  return out;
}

namespace {

struct Welford {
  std::size_t n = 0;
  double mean = 0;
  double m2 = 0;
  void add(double x) {
    ++n;
    double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double se() const {
    if (n <= 1) return 0.0;
    double var = m2 / static_cast<double>(n - 1);
    return std::sqrt(var / static_cast<double>(n));
  }
};

std::vector<std::pair<std::string, double>> stat_properties(const ParentStats& s) {
  std::vector<std::pair<std::string, double>> props;
  props.emplace_back("num_parents", static_cast<double>(s.num_parents));
  for (const auto& [thr, cnt] : s.num_parents_weight_at_least) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "num_parents_w_ge_%g", thr);
    props.emplace_back(buf, static_cast<double>(cnt));
  }
  props.emplace_back("max_parent_weight", s.max_parent_weight);
  props.emplace_back("fraction_new_users", s.fraction_new_users);
  return props;
}

// Aggregates per-(k, bucket, property) accumulators into sorted SeriesPoints.
// Buckets of kMaxTime encode "no bucketing" (emergence summaries).
std::vector<SeriesPoint> aggregate(const CorpusIndex& index,
                                   std::span<const CommunityId> children,
                                   std::span<const int> ks, Duration bucket,
                                   const GenealogyParams& params) {
  std::vector<int> ks_sorted(ks.begin(), ks.end());
  std::sort(ks_sorted.begin(), ks_sorted.end());
  ks_sorted.erase(std::unique(ks_sorted.begin(), ks_sorted.end()), ks_sorted.end());

  // Per-child stats in parallel; accumulation stays serial and ordered so
  // results are identical for any thread count.
  std::vector<std::vector<ChildGenealogy>> per_child(children.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(children.size()); ++i) {
    const CommunityId child = children[i];
    std::vector<int> usable;
    for (int k : ks_sorted)
      if (index.member_count(child) >= static_cast<std::size_t>(k)) usable.push_back(k);
    if (!usable.empty()) per_child[i] = emergence_curve(index, child, usable, params);
  }

  std::map<std::tuple<int, Timestamp, std::string>, Welford> acc;
  for (std::size_t i = 0; i < children.size(); ++i) {
    Timestamp bucket_start = 0;
    if (bucket > 0) {
      Timestamp created = index.creation_time(children[i]);
      // floor division for possibly-negative bucket indices
      Timestamp bi = created >= 0 ? created / bucket : -(((-created) + bucket - 1) / bucket);
      bucket_start = bi * bucket;
    }
    for (const ChildGenealogy& g : per_child[i])
      for (const auto& [name, value] : stat_properties(g.stats))
        acc[{g.stats.k, bucket_start, name}].add(value);
  }

  std::vector<SeriesPoint> out;
  out.reserve(acc.size());
  for (const auto& [key, w] : acc) {
    SeriesPoint p;
    p.k = std::get<0>(key);
    p.bucket_start = std::get<1>(key);
    p.property = std::get<2>(key);
    p.mean = w.mean;
    p.se = w.se();
    p.n = w.n;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

std::vector<SeriesPoint> emergence_summary(const CorpusIndex& index,
                                           std::span<const CommunityId> children,
                                           std::span<const int> ks,
                                           const GenealogyParams& params) {
  return aggregate(index, children, ks, 0, params);
}

std::vector<SeriesPoint> property_time_series(const CorpusIndex& index,
                                              std::span<const CommunityId> children,
                                              std::span<const int> ks, Duration bucket,
                                              const GenealogyParams& params) {
  if (bucket <= 0) throw UserError("bucket duration must be positive");
  if (children.empty()) throw UserError("no eligible children for time series");
  return aggregate(index, children, ks, bucket, params);
}

}  // namespace commgen
