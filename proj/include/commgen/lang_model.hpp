#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "commgen/common.hpp"

namespace commgen {

struct CorpusIndex;
struct GenealogyEdge;

// Lowercase, split on non-alphanumeric runs, drop empties. Bump the version
// string whenever the rule changes; it is recorded in index caches.
inline constexpr const char* kTokenizerVersion = "alnum-lower-v1";
std::vector<std::string> tokenize(std::string_view text);

// Additive-smoothing unigram model. All unseen tokens share a single bucket:
//   p(t)      = (count(t) + alpha) / (total + alpha * (V + 1))
//   p(unseen) =  alpha             / (total + alpha * (V + 1))
struct UnigramLM {
  std::vector<std::pair<TokenId, std::uint32_t>> token_counts;  // sorted by token
  std::uint64_t total = 0;
  double smoothing_mass = 0.01;  // alpha

  std::size_t vocabulary_size() const { return token_counts.size(); }
  double prob(TokenId t) const;
  double unseen_prob() const;

  friend bool operator==(const UnigramLM&, const UnigramLM&) = default;
};

UnigramLM build_lm(std::vector<TokenId> tokens, double alpha);

// LM over all tokens posted to `community` within [t0, t1). Absent when fewer
// than `min_unique_members` distinct users posted in the interval.
std::optional<UnigramLM> community_month_lm(const CorpusIndex& index, CommunityId community,
                                            Timestamp t0, Timestamp t1,
                                            std::size_t min_unique_members, double alpha);

// LM over every post in the corpus within [t0, t1).
UnigramLM corpus_interval_lm(const CorpusIndex& index, Timestamp t0, Timestamp t1, double alpha);

// Bits per token of `tokens` under `lm`. Throws UserError on empty input.
double cross_entropy(const UnigramLM& lm, std::span<const TokenId> tokens);

// Jensen-Shannon divergence, base 2, in [0,1]. Both models are re-normalized
// over the union vocabulary (plus one shared unseen bucket) so the summands
// are proper distributions.
double lm_distance(const UnigramLM& a, const UnigramLM& b);

struct LangParams {
  double alpha = 0.01;
  std::size_t min_unique_members = 100;
  int top_parents = 20;

  friend bool operator==(const LangParams&, const LangParams&) = default;
};

struct PairwiseLangStats {
  double avg = 0;
  double max = 0;
  double stddev = 0;  // population
  int parents_used = 0;
};

// Pairwise LM distances among the child's top weighted parents (capped at
// `top_parents` before checking LM availability; ties on weight break by
// parent id). The per-parent LM covers the 30-day-style window ending at the
// child's creation time. Absent when fewer than two parents qualify.
std::optional<PairwiseLangStats> parent_language_stats(const CorpusIndex& index,
                                                       CommunityId child,
                                                       std::span<const GenealogyEdge> edges,
                                                       Duration window,
                                                       const LangParams& params);

}  // namespace commgen
