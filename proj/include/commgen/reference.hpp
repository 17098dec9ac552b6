#pragma once

#include <map>
#include <string>
#include <vector>

#include "commgen/common.hpp"
#include "commgen/event.hpp"

namespace commgen {

// Serial reference implementation of genealogy extraction that works straight
// off the raw event list, with no index and no parallelism. It exists as an
// independent check on the indexed kernels (and as the baseline in the
// benchmark), so it deliberately shares no code with them: membership comes
// from per-community first-post scans and recency from full scans of each
// member's events.
namespace reference {

struct ChildResult {
  std::map<std::string, int> parent_counts;  // weight = count / k
  int k = 0;
  int members_with_recent = 0;
  std::vector<std::string> first_k_users;
};

// Edges and stats for one child by exhaustive per-member scan.
// Returns false when the child has fewer than k members.
bool child_genealogy(const std::vector<Event>& events, const std::string& child, int k,
                     Duration window, ChildResult& out);

// All communities with at least k members, mapped to their ChildResult.
std::map<std::string, ChildResult> genealogy(const std::vector<Event>& events, int k,
                                             Duration window);

}  // namespace reference
}  // namespace commgen
