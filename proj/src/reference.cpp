#include "commgen/reference.hpp"

#include <algorithm>
#include <set>

namespace commgen::reference {

namespace {

std::map<std::string, Timestamp> creation_times(const std::vector<Event>& events) {
  std::map<std::string, Timestamp> created;
  for (const Event& ev : events) {
    auto [it, fresh] = created.emplace(ev.community, ev.time);
    if (!fresh && ev.time < it->second) it->second = ev.time;
  }
  return created;
}

// Member sequence of one community: (first post, user) ascending.
std::vector<std::pair<Timestamp, std::string>> member_sequence(const std::vector<Event>& events,
                                                               const std::string& community) {
  std::map<std::string, Timestamp> first_post;
  for (const Event& ev : events) {
    if (ev.community != community) continue;
    auto [it, fresh] = first_post.emplace(ev.user, ev.time);
    if (!fresh && ev.time < it->second) it->second = ev.time;
  }
  std::vector<std::pair<Timestamp, std::string>> seq;
  seq.reserve(first_post.size());
  for (const auto& [user, t] : first_post) seq.emplace_back(t, user);
  std::sort(seq.begin(), seq.end());
  return seq;
}

}  // namespace

bool child_genealogy(const std::vector<Event>& events, const std::string& child, int k,
                     Duration window, ChildResult& out) {
  out = ChildResult{};
  out.k = k;
  auto created = creation_times(events);
  auto seq = member_sequence(events, child);
  if (seq.size() < static_cast<std::size_t>(k)) return false;
  const Timestamp child_created = created.at(child);

  for (int r = 0; r < k; ++r) {
    const auto& [join_time, user] = seq[r];
    out.first_k_users.push_back(user);
    std::set<std::string> recent;
    for (const Event& ev : events) {
      if (ev.user != user) continue;
      if (ev.time < join_time - window || ev.time >= join_time) continue;
      if (created.at(ev.community) >= child_created) continue;
      recent.insert(ev.community);
    }
    if (!recent.empty()) ++out.members_with_recent;
    for (const auto& c : recent) ++out.parent_counts[c];
  }
  return true;
}

std::map<std::string, ChildResult> genealogy(const std::vector<Event>& events, int k,
                                             Duration window) {
  std::set<std::string> communities;
  for (const Event& ev : events) communities.insert(ev.community);
  std::map<std::string, ChildResult> out;
  for (const auto& c : communities) {
    ChildResult res;
    if (child_genealogy(events, c, k, window, res)) out.emplace(c, std::move(res));
  }
  return out;
}

}  // namespace commgen::reference
