#pragma once

#include <map>
#include <string>
#include <vector>

#include "commgen/common.hpp"
#include "commgen/event.hpp"

namespace commgen {

struct PlantedParent {
  std::string parent;
  double weight = 0;  // target fraction of the child's first k members
};

struct CommunityPlan {
  std::string name;
  Timestamp created_at = 0;
  int size = 0;              // planned members
  Duration join_gap = 3600;  // seconds between consecutive joins
  std::vector<PlantedParent> parents;
  double new_user_fraction = -1.0;  // < 0: whatever the parent counts leave over
  std::vector<std::string> vocabulary;
  int tokens_per_post = 6;
  int parent_posts_min = 1;  // posts a parented member makes in its parent
  int parent_posts_max = 3;
  // Members assigned to the first parent that also post in the second one.
  int multi_parent_members = 0;
  // Side communities (created on the fly, after this child) each parented
  // member posts in once; they diversify the member's window portfolio
  // without adding genealogy edges.
  int portfolio_breadth = 0;
  // Matched look-alike users that post only in the parent and never join.
  int decoys_per_member = 0;
  std::int64_t feedback_min = -2;
  std::int64_t feedback_max = 10;
};

struct SynthConfig {
  std::uint64_t seed = 1;
  int k = 10;
  Duration window = kThirtyDays;
  std::vector<CommunityPlan> plan;  // ascending creation time
};

// Exact realized genealogy of one planned community, bookkept while the
// events are emitted (weight of parent p = parent_counts[p] / k).
struct ChildTruth {
  int k = 0;
  std::map<std::string, int> parent_counts;
  int members_with_recent = 0;
  std::vector<std::string> first_k_users;
};

struct GroundTruth {
  std::map<std::string, ChildTruth> children;        // planned communities with >= k members
  std::map<std::string, Timestamp> creation_times;   // realized, all communities
  std::map<std::string, std::size_t> member_counts;  // realized, all communities
};

struct SynthResult {
  std::vector<Event> events;  // canonical order; byte-stable per seed
  GroundTruth truth;
};

// Deterministic generator. Validates the plan (parents must precede children,
// planted weights must fit within k alongside the new-user share, history
// must fit inside the recency window) and throws UserError on infeasibility.
SynthResult generate_corpus(const SynthConfig& config);

// Canned plans used by tests, the benchmark, and `commgen synth`.
SynthConfig make_genealogy_plan(std::uint64_t seed);  // planted weights, exact recovery
SynthConfig make_growth_plan(std::uint64_t seed);     // label driven by max parent weight
SynthConfig make_early_plan(std::uint64_t seed);      // positives with diverse portfolios

void write_ground_truth(const std::string& path, const SynthConfig& config,
                        const GroundTruth& truth);

}  // namespace commgen
