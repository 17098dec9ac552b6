#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "commgen/common.hpp"
#include "commgen/event.hpp"

namespace commgen {

struct Post {
  Timestamp time = 0;
  UserId user = 0;
  CommunityId community = 0;
  std::int64_t feedback = 0;
  std::uint64_t tok_begin = 0;  // span into CorpusIndex::token_buf
  std::uint64_t tok_end = 0;

  friend bool operator==(const Post&, const Post&) = default;
};

struct Member {
  UserId user = 0;
  Timestamp first_post = 0;

  friend bool operator==(const Member&, const Member&) = default;
};

struct CommunityRecord {
  Timestamp creation_time = 0;          // earliest post to the community
  std::vector<Member> members;          // join order: (first_post, user name)
  std::vector<std::uint32_t> posts;     // indices into CorpusIndex::posts, time order

  friend bool operator==(const CommunityRecord&, const CommunityRecord&) = default;
};

struct UserRecord {
  std::vector<std::uint32_t> posts;     // indices into CorpusIndex::posts, time order

  friend bool operator==(const UserRecord&, const UserRecord&) = default;
};

// Immutable once built; safe to share across threads. The layout is fully
// canonical: ids are ranks in sorted name tables and posts are sorted by
// (time, user, community, feedback, tokens), so the same multiset of events
// yields an identical index regardless of input order.
struct CorpusIndex {
  std::vector<std::string> user_names;
  std::vector<std::string> community_names;
  std::vector<std::string> token_names;

  std::vector<Post> posts;           // global time order
  std::vector<TokenId> token_buf;

  std::vector<UserRecord> user_data;            // by UserId
  std::vector<CommunityRecord> community_data;  // by CommunityId

  std::optional<UserId> find_user(std::string_view name) const;
  std::optional<CommunityId> find_community(std::string_view name) const;

  std::span<const TokenId> post_tokens(const Post& p) const {
    return {token_buf.data() + p.tok_begin, token_buf.data() + p.tok_end};
  }
  std::size_t member_count(CommunityId c) const { return community_data[c].members.size(); }
  Timestamp creation_time(CommunityId c) const { return community_data[c].creation_time; }

  friend bool operator==(const CorpusIndex&, const CorpusIndex&) = default;
};

// Throws UserError on empty input.
CorpusIndex build_index(const std::vector<Event>& events);

struct Eligibility {
  std::size_t min_members = 100;       // strictly more than this many members
  Timestamp created_after = 0;         // exclusive
  Timestamp created_until = kMaxTime;  // inclusive
};

// Communities with more than `min_members` members created in
// (created_after, created_until]. Sorted by id.
std::vector<CommunityId> eligible_children(const CorpusIndex& index, const Eligibility& e);

// Binary index cache, versioned, round-trip stable.
void save_index(const CorpusIndex& index, const std::string& path);
CorpusIndex load_index(const std::string& path);

}  // namespace commgen
