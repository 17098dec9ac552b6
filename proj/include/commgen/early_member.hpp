#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "commgen/common.hpp"
#include "commgen/corpus.hpp"
#include "commgen/dataset.hpp"
#include "commgen/genealogy.hpp"
#include "commgen/lang_model.hpp"

namespace commgen {

// Uniform sample of n edges without replacement (all edges when there are
// fewer than n), deterministic in the seed. Order follows the draw.
std::vector<GenealogyEdge> sample_tuples(std::span<const GenealogyEdge> edges, std::size_t n,
                                         std::uint64_t seed);

// Nearest neighbor of `positive` by number of posts in the parent over the
// window before the positive joined the child, among parent members outside
// the child's first k. Ties break to the lexicographically smaller user.
// Absent when no candidate lies within max_distance posts.
std::optional<UserId> match_negative(const CorpusIndex& index, UserId positive,
                                     CommunityId parent, CommunityId child, int k,
                                     Duration window, std::int64_t max_distance = 5);

std::vector<std::string> user_feature_names();

// Behavioral features of `user` over [t - window, t), parent-scoped, global,
// and interplay. Returns nullopt when the user has no posts in the window.
std::optional<std::vector<double>> extract_user_features(const CorpusIndex& index, UserId user,
                                                         CommunityId parent, Timestamp t,
                                                         Duration window, double alpha);

struct EarlyParams {
  GenealogyParams genealogy;
  LangParams lang;
  std::size_t num_tuples = 10000;
  std::uint64_t seed = 0;
  std::int64_t max_match_distance = 5;
};

struct EarlyBuildInfo {
  std::size_t tuples_used = 0;
  std::size_t positives_seen = 0;
  std::size_t pairs_kept = 0;
  std::size_t dropped_no_match = 0;
  std::size_t dropped_no_activity = 0;  // users excluded for zero window posts
};

// Matched-pair dataset: one row per retained positive and one per matched
// negative, labels 1/0, exactly balanced.
Dataset build_early_dataset(const CorpusIndex& index, std::span<const CommunityId> children,
                            const EarlyParams& params, EarlyBuildInfo* info = nullptr);

// Families in fixed order: parent, global, interplay.
std::vector<std::pair<std::string, std::vector<std::size_t>>> early_feature_families(
    std::span<const std::string> names);

}  // namespace commgen
