#include "commgen/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <tuple>

#include "json.hpp"

#include "commgen/rng.hpp"

namespace commgen {

namespace {

std::string padded(const char* prefix, std::uint64_t n, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*llu", prefix, width,
                static_cast<unsigned long long>(n));
  return buf;
}

struct Emitter {
  const SynthConfig& cfg;
  SynthResult& result;
  Rng& rng;

  void bookkeep(const std::string& community, Timestamp t) {
    auto [it, fresh] = result.truth.creation_times.emplace(community, t);
    if (!fresh && t < it->second) it->second = t;
  }

  // All posts of one user in one community; membership is counted once.
  void posts(const std::string& user, const CommunityPlan& plan,
             const std::string& community, const std::vector<Timestamp>& times) {
    ++result.truth.member_counts[community];
    for (Timestamp t : times) {
      Event ev;
      ev.user = user;
      ev.community = community;
      ev.time = t;
      int n_tokens = plan.tokens_per_post;
      std::string title, body;
      for (int i = 0; i < n_tokens; ++i) {
        const std::string& tok =
            plan.vocabulary[static_cast<std::size_t>(rng.below(plan.vocabulary.size()))];
        std::string& dst = i < (n_tokens + 1) / 2 ? title : body;
        if (!dst.empty()) dst += ' ';
        dst += tok;
      }
      ev.title = std::move(title);
      ev.body = std::move(body);
      ev.feedback = rng.range(plan.feedback_min, plan.feedback_max);
      bookkeep(community, t);
      result.events.push_back(std::move(ev));
    }
  }
};

// Evenly spaced times for n posts in [lo, hi]; throws when they do not fit.
std::vector<Timestamp> history_grid(Timestamp lo, Timestamp hi, int n, const std::string& why) {
  if (n < 1 || lo > hi || hi - lo + 1 < n)
    throw UserError("synth: infeasible plan, " + why);
  std::vector<Timestamp> times;
  times.reserve(n);
  Timestamp step = (hi - lo + 1) / n;
  for (int i = 0; i < n; ++i) times.push_back(lo + i * step);
  return times;
}

}  // namespace

SynthResult generate_corpus(const SynthConfig& cfg) {
  if (cfg.k < 1) throw UserError("synth: k must be positive");
  if (cfg.window <= 0) throw UserError("synth: window must be positive");
  if (cfg.plan.empty()) throw UserError("synth: empty plan");

  std::map<std::string, std::size_t> plan_index;
  for (std::size_t i = 0; i < cfg.plan.size(); ++i) {
    const CommunityPlan& p = cfg.plan[i];
    if (p.name.empty() || p.size < 1 || p.join_gap < 1 || p.vocabulary.empty() ||
        p.tokens_per_post < 1 || p.parent_posts_min < 1 ||
        p.parent_posts_min > p.parent_posts_max || p.feedback_min > p.feedback_max ||
        p.portfolio_breadth < 0 || p.decoys_per_member < 0 || p.multi_parent_members < 0)
      throw UserError("synth: malformed plan entry: " + p.name);
    if (!plan_index.emplace(p.name, i).second)
      throw UserError("synth: duplicate community in plan: " + p.name);
    if (i > 0 && p.created_at < cfg.plan[i - 1].created_at)
      throw UserError("synth: plan must be ordered by creation time");
    if (p.portfolio_breadth > 0 &&
        (p.join_gap <= p.portfolio_breadth || cfg.window <= p.portfolio_breadth))
      throw UserError("synth: portfolio does not fit between joins: " + p.name);
  }

  Rng rng(cfg.seed);
  SynthResult result;
  Emitter emit{cfg, result, rng};
  std::map<std::string, Timestamp> early_end;  // time of the k_eff-th planned join
  std::uint64_t user_counter = 0, side_counter = 0;

  for (const CommunityPlan& plan : cfg.plan) {
    const int k_eff = std::min(cfg.k, plan.size);

    // resolve planted parents into member counts out of the first k
    std::vector<std::size_t> parent_plan;  // plan index per planted parent
    std::vector<int> parent_count;
    int assigned_total = 0;
    for (const PlantedParent& pp : plan.parents) {
      auto it = plan_index.find(pp.parent);
      if (it == plan_index.end() ||
          cfg.plan[it->second].created_at >= plan.created_at)
        throw UserError("synth: parent must be created before child: " + pp.parent);
      if (pp.weight <= 0.0 || pp.weight > 1.0)
        throw UserError("synth: planted weight outside (0,1]: " + pp.parent);
      int c = static_cast<int>(std::lround(pp.weight * cfg.k));
      parent_plan.push_back(it->second);
      parent_count.push_back(c);
      assigned_total += c;
    }
    if (!plan.parents.empty() && plan.size < cfg.k)
      throw UserError("synth: planted parents need size >= k: " + plan.name);
    int new_count = plan.new_user_fraction < 0
                        ? cfg.k - assigned_total
                        : static_cast<int>(std::lround(plan.new_user_fraction * cfg.k));
    if (assigned_total > cfg.k || new_count < 0 || assigned_total + new_count > cfg.k)
      throw UserError("synth: planted weights and new-user fraction exceed k: " + plan.name);
    if (plan.multi_parent_members > 0 && plan.parents.size() < 2)
      throw UserError("synth: multi-parent members need two planted parents: " + plan.name);

    std::vector<int> assign(static_cast<std::size_t>(k_eff), -1);
    {
      std::size_t pos = 0;
      for (std::size_t pi = 0; pi < parent_count.size(); ++pi)
        for (int c = 0; c < parent_count[pi]; ++c) assign[pos++] = static_cast<int>(pi);
      rng.shuffle(assign);
      if (plan.portfolio_breadth > 0 && !assign.empty() && assign[0] != -1) {
        // the first member joins at creation and has no room for portfolio
        // posts after it, so that slot must hold a new user
        auto it = std::find(assign.begin(), assign.end(), -1);
        if (it == assign.end())
          throw UserError("synth: portfolio plan needs a new-user slot: " + plan.name);
        std::swap(assign[0], *it);
      }
    }

    ChildTruth truth;
    truth.k = cfg.k;
    int multi_left = plan.multi_parent_members;

    for (int j = 1; j <= plan.size; ++j) {
      const Timestamp t_j = plan.created_at + static_cast<Timestamp>(j - 1) * plan.join_gap;
      const std::string user = padded("u", user_counter++, 7);
      if (j <= k_eff) truth.first_k_users.push_back(user);

      const int a = j <= k_eff ? assign[static_cast<std::size_t>(j - 1)] : -1;
      if (a >= 0) {
        const CommunityPlan& parent = cfg.plan[parent_plan[static_cast<std::size_t>(a)]];
        const Timestamp guard = early_end.at(parent.name) + 1;
        const Timestamp lo = std::max(t_j - cfg.window, guard);
        const Timestamp hi = t_j - 1;
        const int n = static_cast<int>(
            rng.range(plan.parent_posts_min, plan.parent_posts_max));
        emit.posts(user, parent, parent.name,
                   history_grid(lo, hi, n, "history window too small for " + plan.name));
        ++truth.parent_counts[parent.name];
        ++truth.members_with_recent;

        if (a == 0 && multi_left > 0 && plan.parents.size() >= 2) {
          const CommunityPlan& second = cfg.plan[parent_plan[1]];
          const Timestamp lo2 = std::max(t_j - cfg.window, early_end.at(second.name) + 1);
          emit.posts(user, second, second.name,
                     history_grid(lo2, hi, 1, "second-parent history for " + plan.name));
          ++truth.parent_counts[second.name];
          --multi_left;
        }

        // Portfolio posts land strictly after the child's creation so the
        // side communities can never become parents of it.
        for (int b = 0; b < plan.portfolio_breadth; ++b) {
          const Timestamp tau = t_j - 1 - b;
          if (tau <= plan.created_at || tau < t_j - cfg.window)
            throw UserError("synth: portfolio post before child creation: " + plan.name);
          emit.posts(user, plan, padded("side", side_counter++, 6), {tau});
        }

        for (int d = 0; d < plan.decoys_per_member; ++d) {
          const std::string decoy = padded("u", user_counter++, 7);
          const int nd = n + static_cast<int>(rng.below(2));
          emit.posts(decoy, parent, parent.name,
                     history_grid(lo, hi, nd, "decoy history for " + plan.name));
        }
      }

      emit.posts(user, plan, plan.name, {t_j});
    }

    early_end[plan.name] =
        plan.created_at + static_cast<Timestamp>(k_eff - 1) * plan.join_gap;
    if (plan.size >= cfg.k) result.truth.children.emplace(plan.name, std::move(truth));
  }

  std::sort(result.events.begin(), result.events.end(),
            [](const Event& a, const Event& b) {
              return std::tie(a.time, a.user, a.community, a.feedback, a.title, a.body) <
                     std::tie(b.time, b.user, b.community, b.feedback, b.title, b.body);
            });
  return result;
}

namespace {

std::vector<std::string> vocab_pool(const std::string& stem, int n) {
  std::vector<std::string> v;
  v.reserve(n);
  for (int i = 0; i < n; ++i) v.push_back(stem + std::to_string(i));
  return v;
}

}  // namespace

SynthConfig make_genealogy_plan(std::uint64_t seed) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.k = 10;
  cfg.window = kThirtyDays;
  Rng rng = Rng::substream(seed, 0x67656e);

  const int n_roots = 2 + static_cast<int>(rng.below(3));
  for (int i = 0; i < n_roots; ++i) {
    CommunityPlan p;
    p.name = "r" + std::to_string(i);
    p.created_at = 100000 + i * 5000;
    p.size = 10 + static_cast<int>(rng.below(5));
    p.join_gap = 300;
    p.vocabulary = vocab_pool("base", 30);
    cfg.plan.push_back(std::move(p));
  }

  const int n_children = 3 + static_cast<int>(rng.below(5));
  for (int i = 0; i < n_children; ++i) {
    CommunityPlan p;
    p.name = "c" + std::to_string(i);
    p.created_at = 3000000 + i * 400000;
    p.size = 10 + static_cast<int>(rng.below(11));
    p.join_gap = 120 + static_cast<int>(rng.below(700));
    p.vocabulary = vocab_pool("topic" + std::to_string(i % 4) + "_", 20);
    p.parent_posts_min = 1;
    p.parent_posts_max = 3;

    // planted parents from earlier communities, weights in tenths
    const std::size_t pool = cfg.plan.size();
    int np = static_cast<int>(rng.below(3));
    std::vector<std::size_t> picked;
    int budget = cfg.k - 1;
    for (int q = 0; q < np && budget > 0; ++q) {
      std::size_t cand = static_cast<std::size_t>(rng.below(pool));
      if (std::find(picked.begin(), picked.end(), cand) != picked.end()) continue;
      if (cfg.plan[cand].size < cfg.k) continue;  // keep parents out of tiny roots
      picked.push_back(cand);
      int count = 1 + static_cast<int>(rng.below(std::min(4, budget)));
      budget -= count;
      p.parents.push_back(
          PlantedParent{cfg.plan[cand].name, static_cast<double>(count) / cfg.k});
    }
    if (p.parents.size() >= 2 && rng.below(2) == 0) p.multi_parent_members = 1;
    cfg.plan.push_back(std::move(p));
  }
  return cfg;
}

SynthConfig make_growth_plan(std::uint64_t seed) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.k = 10;
  cfg.window = kThirtyDays;
  Rng rng = Rng::substream(seed, 0x67726f);

  for (int i = 0; i < 2; ++i) {
    CommunityPlan root;
    root.name = i == 0 ? "root_a" : "root_b";
    root.created_at = 1000000 + i * 50000;
    root.size = 12;
    root.join_gap = 600;
    root.vocabulary = vocab_pool("root", 30);
    cfg.plan.push_back(std::move(root));
  }

  for (int i = 0; i < 80; ++i) {
    CommunityPlan p;
    p.name = padded("g", static_cast<std::uint64_t>(i), 2);
    p.created_at = 3000000 + i * 21600;
    const bool high = i % 2 == 0;
    p.size = high ? 118 + static_cast<int>(rng.below(9))
                  : 38 + static_cast<int>(rng.below(5));
    p.join_gap = 300 + static_cast<int>(rng.below(600));
    p.vocabulary = vocab_pool("g" + std::to_string(i % 6) + "_", 20);
    p.parents.push_back(
        PlantedParent{(i / 2) % 2 == 0 ? "root_a" : "root_b", high ? 0.6 : 0.1});
    p.parent_posts_min = 1;
    p.parent_posts_max = 3;
    cfg.plan.push_back(std::move(p));
  }
  return cfg;
}

SynthConfig make_early_plan(std::uint64_t seed) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.k = 10;
  cfg.window = kThirtyDays;
  Rng rng = Rng::substream(seed, 0x65726c);

  for (int i = 0; i < 12; ++i) {
    CommunityPlan p;
    p.name = padded("p", static_cast<std::uint64_t>(i), 2);
    p.created_at = 1000000 + i * 7200;
    p.size = 10;
    p.join_gap = 60;
    p.vocabulary = vocab_pool("par" + std::to_string(i) + "_", 25);
    cfg.plan.push_back(std::move(p));
  }
  for (int i = 0; i < 12; ++i) {
    CommunityPlan p;
    p.name = padded("e", static_cast<std::uint64_t>(i), 2);
    p.created_at = 3000000 + i * 100000;
    p.size = 14;
    p.join_gap = 3600;
    p.vocabulary = vocab_pool("kid" + std::to_string(i) + "_", 25);
    p.parents.push_back(PlantedParent{padded("p", static_cast<std::uint64_t>(i), 2), 0.6});
    p.parent_posts_min = 3;
    p.parent_posts_max = 7;
    p.portfolio_breadth = 4;
    p.decoys_per_member = 2;
    cfg.plan.push_back(std::move(p));
  }
  (void)rng;
  return cfg;
}

void write_ground_truth(const std::string& path, const SynthConfig& config,
                        const GroundTruth& truth) {
  nlohmann::json j;
  j["schema"] = "commgen-truth v1";
  j["seed"] = config.seed;
  j["k"] = config.k;
  j["window"] = config.window;
  nlohmann::json children = nlohmann::json::object();
  for (const auto& [name, ct] : truth.children) {
    nlohmann::json c;
    c["k"] = ct.k;
    c["parent_counts"] = ct.parent_counts;
    c["members_with_recent"] = ct.members_with_recent;
    c["first_k_users"] = ct.first_k_users;
    children[name] = std::move(c);
  }
  j["children"] = std::move(children);
  j["creation_times"] = truth.creation_times;
  j["member_counts"] = truth.member_counts;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw UserError("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out.flush()) throw UserError("I/O error while writing: " + path);
}

}  // namespace commgen
