#include "commgen/lang_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_set>

#include "commgen/corpus.hpp"
#include "commgen/genealogy.hpp"

namespace commgen {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

double UnigramLM::prob(TokenId t) const {
  auto it = std::lower_bound(token_counts.begin(), token_counts.end(), t,
                             [](const auto& p, TokenId v) { return p.first < v; });
  double denom = static_cast<double>(total) +
                 smoothing_mass * (static_cast<double>(token_counts.size()) + 1.0);
  if (it == token_counts.end() || it->first != t) return smoothing_mass / denom;
  return (static_cast<double>(it->second) + smoothing_mass) / denom;
}

double UnigramLM::unseen_prob() const {
  double denom = static_cast<double>(total) +
                 smoothing_mass * (static_cast<double>(token_counts.size()) + 1.0);
  return smoothing_mass / denom;
}

UnigramLM build_lm(std::vector<TokenId> tokens, double alpha) {
  if (alpha <= 0) throw UserError("smoothing mass must be positive");
  UnigramLM lm;
  lm.smoothing_mass = alpha;
  lm.total = tokens.size();
  std::sort(tokens.begin(), tokens.end());
  for (std::size_t i = 0; i < tokens.size();) {
    std::size_t j = i;
    while (j < tokens.size() && tokens[j] == tokens[i]) ++j;
    lm.token_counts.emplace_back(tokens[i], static_cast<std::uint32_t>(j - i));
    i = j;
  }
  return lm;
}

namespace {

std::size_t lower_bound_time(const CorpusIndex& index, const std::vector<std::uint32_t>& posts,
                             Timestamp t) {
  return std::lower_bound(posts.begin(), posts.end(), t,
                          [&](std::uint32_t pi, Timestamp v) {
                            return index.posts[pi].time < v;
                          }) -
         posts.begin();
}

}  // namespace

std::optional<UnigramLM> community_month_lm(const CorpusIndex& index, CommunityId community,
                                            Timestamp t0, Timestamp t1,
                                            std::size_t min_unique_members, double alpha) {
  if (t0 >= t1) throw UserError("LM interval must satisfy t0 < t1");
  const auto& posts = index.community_data[community].posts;
  std::size_t lo = lower_bound_time(index, posts, t0);
  std::size_t hi = lower_bound_time(index, posts, t1);

  std::unordered_set<UserId> unique;
  std::vector<TokenId> tokens;
  for (std::size_t i = lo; i < hi; ++i) {
    const Post& p = index.posts[posts[i]];
    unique.insert(p.user);
    auto span = index.post_tokens(p);
    tokens.insert(tokens.end(), span.begin(), span.end());
  }
  if (unique.size() < min_unique_members) return std::nullopt;
  return build_lm(std::move(tokens), alpha);
}

UnigramLM corpus_interval_lm(const CorpusIndex& index, Timestamp t0, Timestamp t1, double alpha) {
  if (t0 >= t1) throw UserError("LM interval must satisfy t0 < t1");
  auto lo = std::lower_bound(index.posts.begin(), index.posts.end(), t0,
                             [](const Post& p, Timestamp v) { return p.time < v; });
  auto hi = std::lower_bound(index.posts.begin(), index.posts.end(), t1,
                             [](const Post& p, Timestamp v) { return p.time < v; });
  std::vector<TokenId> tokens;
  for (auto it = lo; it != hi; ++it) {
    auto span = index.post_tokens(*it);
    tokens.insert(tokens.end(), span.begin(), span.end());
  }
  return build_lm(std::move(tokens), alpha);
}

double cross_entropy(const UnigramLM& lm, std::span<const TokenId> tokens) {
  if (tokens.empty()) throw UserError("cross entropy of an empty token multiset is undefined");
  double sum = 0;
  for (TokenId t : tokens) sum += std::log2(lm.prob(t));
  return -sum / static_cast<double>(tokens.size());
}

double lm_distance(const UnigramLM& a, const UnigramLM& b) {
  // Probabilities are re-derived over the union vocabulary so both sides are
  // distributions on the same support (union tokens + one unseen bucket).
  std::vector<TokenId> vocab;
  vocab.reserve(a.token_counts.size() + b.token_counts.size());
  for (const auto& [t, c] : a.token_counts) vocab.push_back(t);
  for (const auto& [t, c] : b.token_counts) vocab.push_back(t);
  std::sort(vocab.begin(), vocab.end());
  vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());

  const double v1 = static_cast<double>(vocab.size()) + 1.0;
  const double denom_a = static_cast<double>(a.total) + a.smoothing_mass * v1;
  const double denom_b = static_cast<double>(b.total) + b.smoothing_mass * v1;

  auto count_in = [](const UnigramLM& lm, TokenId t) -> double {
    auto it = std::lower_bound(lm.token_counts.begin(), lm.token_counts.end(), t,
                               [](const auto& p, TokenId v) { return p.first < v; });
    if (it == lm.token_counts.end() || it->first != t) return 0.0;
    return static_cast<double>(it->second);
  };

  double js = 0;
  auto accumulate = [&](double pa, double pb) {
    double m = 0.5 * (pa + pb);
    if (pa > 0) js += 0.5 * pa * std::log2(pa / m);
    if (pb > 0) js += 0.5 * pb * std::log2(pb / m);
  };
  for (TokenId t : vocab)
    accumulate((count_in(a, t) + a.smoothing_mass) / denom_a,
               (count_in(b, t) + b.smoothing_mass) / denom_b);
  accumulate(a.smoothing_mass / denom_a, b.smoothing_mass / denom_b);
  return std::clamp(js, 0.0, 1.0);
}

std::optional<PairwiseLangStats> parent_language_stats(const CorpusIndex& index,
                                                       CommunityId child,
                                                       std::span<const GenealogyEdge> edges,
                                                       Duration window,
                                                       const LangParams& params) {
  // Top weighted parents first (ties by parent id), capped before the LM
  // availability check; LMs for hundreds of light parents would dominate the
  // cost otherwise.
  std::vector<const GenealogyEdge*> ranked;
  ranked.reserve(edges.size());
  for (const auto& e : edges) ranked.push_back(&e);
  std::sort(ranked.begin(), ranked.end(), [](const GenealogyEdge* x, const GenealogyEdge* y) {
    if (x->weight != y->weight) return x->weight > y->weight;
    return x->parent < y->parent;
  });
  if (ranked.size() > static_cast<std::size_t>(params.top_parents))
    ranked.resize(static_cast<std::size_t>(params.top_parents));

  const Timestamp t1 = index.creation_time(child);
  const Timestamp t0 = t1 - window;
  std::vector<UnigramLM> lms;
  for (const GenealogyEdge* e : ranked) {
    auto lm = community_month_lm(index, e->parent, t0, t1, params.min_unique_members,
                                 params.alpha);
    if (lm) lms.push_back(std::move(*lm));
  }
  if (lms.size() < 2) return std::nullopt;

  double sum = 0, sum_sq = 0, max = 0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < lms.size(); ++i) {
    for (std::size_t j = i + 1; j < lms.size(); ++j) {
      double d = lm_distance(lms[i], lms[j]);
      sum += d;
      sum_sq += d * d;
      max = std::max(max, d);
      ++pairs;
    }
  }
  PairwiseLangStats out;
  out.parents_used = static_cast<int>(lms.size());
  out.avg = sum / static_cast<double>(pairs);
  out.max = max;
  double var = sum_sq / static_cast<double>(pairs) - out.avg * out.avg;
  out.stddev = std::sqrt(std::max(0.0, var));
  return out;
}

}  // namespace commgen
