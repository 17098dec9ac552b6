#pragma once

#include <span>
#include <string>
#include <vector>

#include "commgen/common.hpp"
#include "commgen/corpus.hpp"

namespace commgen {

// parent -> child, weight = fraction of the child's first k members that were
// recently active in the parent. Always in (0, 1]; zero-weight edges are not
// materialized.
struct GenealogyEdge {
  CommunityId parent = 0;
  CommunityId child = 0;
  double weight = 0;

  friend bool operator==(const GenealogyEdge&, const GenealogyEdge&) = default;
};

struct ParentStats {
  CommunityId child = 0;
  int k = 0;
  int num_parents = 0;
  // (threshold, number of parents with weight >= threshold)
  std::vector<std::pair<double, int>> num_parents_weight_at_least;
  double max_parent_weight = 0;   // 0 when the child has no parents
  double fraction_new_users = 0;  // members with no recent prior community

  friend bool operator==(const ParentStats&, const ParentStats&) = default;
};

struct GenealogyParams {
  int k = 100;
  Duration window = kThirtyDays;  // "the month before" a member's first post
  std::vector<double> weight_thresholds = {0.05, 0.1};
};

// Communities in which `user` posted at least once in [t - window, t).
// The post at t itself does not count. Sorted by id.
std::vector<CommunityId> recent_communities(const CorpusIndex& index, UserId user,
                                            Timestamp t, Duration window);
// Unknown users have no history; returns the empty set rather than failing.
std::vector<CommunityId> recent_communities(const CorpusIndex& index, std::string_view user,
                                            Timestamp t, Duration window);

struct ChildGenealogy {
  std::vector<GenealogyEdge> edges;  // sorted by parent id
  ParentStats stats;

  friend bool operator==(const ChildGenealogy&, const ChildGenealogy&) = default;
};

// Edges and stats for one child at params.k. Each of the first k members is
// evaluated over [t_r - window, t_r) at their own first post t_r; only
// communities created strictly before the child qualify as parents. Throws
// UserError when the child has fewer than k members.
ChildGenealogy parent_edges(const CorpusIndex& index, CommunityId child,
                            const GenealogyParams& params);

// Stats for the same child at each k in `ks` (must be positive ascending) in
// one pass, so prefixes nest. Throws when the child has fewer than max(ks)
// members.
std::vector<ChildGenealogy> emergence_curve(const CorpusIndex& index, CommunityId child,
                                            std::span<const int> ks,
                                            const GenealogyParams& params);

// Parallel driver: parent_edges for every child, in child order.
std::vector<ChildGenealogy> genealogy_for_children(const CorpusIndex& index,
                                                   std::span<const CommunityId> children,
                                                   const GenealogyParams& params);

// One aggregated data point: mean and standard error of a ParentStats
// property over a group of children.
struct SeriesPoint {
  int k = 0;
  Timestamp bucket_start = 0;  // 0 for emergence summaries
  std::string property;
  double mean = 0;
  double se = 0;  // sample stddev / sqrt(n); 0 when n == 1
  std::size_t n = 0;
};

// Per-k averages over children that have at least k members (emergence
// curves). Children with fewer members are skipped for that k.
std::vector<SeriesPoint> emergence_summary(const CorpusIndex& index,
                                           std::span<const CommunityId> children,
                                           std::span<const int> ks,
                                           const GenealogyParams& params);

// Per-creation-time-bucket averages for each k. Buckets are
// [i*bucket, (i+1)*bucket); empty buckets are omitted.
std::vector<SeriesPoint> property_time_series(const CorpusIndex& index,
                                              std::span<const CommunityId> children,
                                              std::span<const int> ks, Duration bucket,
                                              const GenealogyParams& params);

}  // namespace commgen
