#include "commgen/corpus.hpp"

#include <omp.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "commgen/lang_model.hpp"

namespace commgen {

namespace {

template <typename T>
std::uint32_t rank_of(const std::vector<T>& sorted, const T& value) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), value);
  return static_cast<std::uint32_t>(it - sorted.begin());
}

}  // namespace

std::optional<UserId> CorpusIndex::find_user(std::string_view name) const {
  auto it = std::lower_bound(user_names.begin(), user_names.end(), name);
  if (it == user_names.end() || *it != name) return std::nullopt;
  return static_cast<UserId>(it - user_names.begin());
}

std::optional<CommunityId> CorpusIndex::find_community(std::string_view name) const {
  auto it = std::lower_bound(community_names.begin(), community_names.end(), name);
  if (it == community_names.end() || *it != name) return std::nullopt;
  return static_cast<CommunityId>(it - community_names.begin());
}

CorpusIndex build_index(const std::vector<Event>& events) {
  if (events.empty()) throw UserError("cannot build an index from an empty corpus");

  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(events.size());

  std::vector<std::vector<std::string>> raw_tokens(events.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    raw_tokens[i] = tokenize(events[i].title);
    auto body = tokenize(events[i].body);
    raw_tokens[i].insert(raw_tokens[i].end(), std::make_move_iterator(body.begin()),
                         std::make_move_iterator(body.end()));
  }

  CorpusIndex index;
  index.user_names.reserve(events.size());
  index.community_names.reserve(events.size());
  for (const Event& ev : events) {
    index.user_names.push_back(ev.user);
    index.community_names.push_back(ev.community);
  }
  for (const auto& toks : raw_tokens)
    index.token_names.insert(index.token_names.end(), toks.begin(), toks.end());

  auto dedupe = [](std::vector<std::string>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    v.shrink_to_fit();
  };
  dedupe(index.user_names);
  dedupe(index.community_names);
  dedupe(index.token_names);

  struct Staged {
    Post post;
    std::vector<TokenId> tokens;
  };
  std::vector<Staged> staged(events.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    Staged& s = staged[i];
    s.post.time = events[i].time;
    s.post.user = rank_of(index.user_names, events[i].user);
    s.post.community = rank_of(index.community_names, events[i].community);
    s.post.feedback = events[i].feedback;
    s.tokens.reserve(raw_tokens[i].size());
    for (const auto& t : raw_tokens[i]) s.tokens.push_back(rank_of(index.token_names, t));
  }
  raw_tokens.clear();
  raw_tokens.shrink_to_fit();

  // Canonical post order. The token sequence participates so that duplicate
  // (time, user, community, feedback) events still sort deterministically.
  std::sort(staged.begin(), staged.end(), [](const Staged& a, const Staged& b) {
    if (a.post.time != b.post.time) return a.post.time < b.post.time;
    if (a.post.user != b.post.user) return a.post.user < b.post.user;
    if (a.post.community != b.post.community) return a.post.community < b.post.community;
    if (a.post.feedback != b.post.feedback) return a.post.feedback < b.post.feedback;
    return a.tokens < b.tokens;
  });

  index.posts.reserve(staged.size());
  std::size_t total_tokens = 0;
  for (const Staged& s : staged) total_tokens += s.tokens.size();
  index.token_buf.reserve(total_tokens);
  for (Staged& s : staged) {
    s.post.tok_begin = index.token_buf.size();
    index.token_buf.insert(index.token_buf.end(), s.tokens.begin(), s.tokens.end());
    s.post.tok_end = index.token_buf.size();
    index.posts.push_back(s.post);
  }
  staged.clear();
  staged.shrink_to_fit();

  index.user_data.resize(index.user_names.size());
  index.community_data.resize(index.community_names.size());

  std::unordered_set<std::uint64_t> seen_membership;
  seen_membership.reserve(index.posts.size());
  for (std::uint32_t pi = 0; pi < index.posts.size(); ++pi) {
    const Post& p = index.posts[pi];
    index.user_data[p.user].posts.push_back(pi);
    CommunityRecord& cr = index.community_data[p.community];
    if (cr.posts.empty()) cr.creation_time = p.time;
    cr.posts.push_back(pi);
    std::uint64_t key = (static_cast<std::uint64_t>(p.user) << 32) | p.community;
    if (seen_membership.insert(key).second)
      cr.members.push_back(Member{p.user, p.time});
  }
  return index;
}

std::vector<CommunityId> eligible_children(const CorpusIndex& index, const Eligibility& e) {
  if (e.min_members < 1) throw UserError("min_members must be at least 1");
  if (e.created_after >= e.created_until)
    throw UserError("invalid creation range: created_after must precede created_until");
  std::vector<CommunityId> out;
  for (CommunityId c = 0; c < index.community_data.size(); ++c) {
    const CommunityRecord& cr = index.community_data[c];
    if (cr.members.size() <= e.min_members) continue;
    if (cr.creation_time <= e.created_after || cr.creation_time > e.created_until) continue;
    out.push_back(c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Binary cache

namespace {

constexpr std::uint32_t kCacheMagic = 0x43474958;  // "CGIX"
constexpr std::uint32_t kCacheVersion = 1;
constexpr std::uint32_t kEndianMark = 0x01020304;

struct Writer {
  std::ofstream out;
  explicit Writer(const std::string& path) : out(path, std::ios::binary) {
    if (!out) throw UserError("cannot open for writing: " + path);
  }
  void raw(const void* p, std::size_t n) { out.write(static_cast<const char*>(p), n); }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void i64(std::int64_t v) { raw(&v, sizeof v); }
  void str(const std::string& s) {
    u64(s.size());
    raw(s.data(), s.size());
  }
  void names(const std::vector<std::string>& v) {
    u64(v.size());
    for (const auto& s : v) str(s);
  }
  void vec_u32(const std::vector<std::uint32_t>& v) {
    u64(v.size());
    raw(v.data(), v.size() * sizeof(std::uint32_t));
  }
};

struct Reader {
  std::ifstream in;
  explicit Reader(const std::string& path) : in(path, std::ios::binary) {
    if (!in) throw UserError("cannot open index cache: " + path);
  }
  void raw(void* p, std::size_t n) {
    in.read(static_cast<char*>(p), n);
    if (!in) throw DataError("truncated index cache");
  }
  std::uint32_t u32() { std::uint32_t v; raw(&v, sizeof v); return v; }
  std::uint64_t u64() { std::uint64_t v; raw(&v, sizeof v); return v; }
  std::int64_t i64() { std::int64_t v; raw(&v, sizeof v); return v; }
  std::string str() {
    std::string s(u64(), '\0');
    if (!s.empty()) raw(s.data(), s.size());
    return s;
  }
  std::vector<std::string> names() {
    std::vector<std::string> v(u64());
    for (auto& s : v) s = str();
    return v;
  }
  std::vector<std::uint32_t> vec_u32() {
    std::vector<std::uint32_t> v(u64());
    if (!v.empty()) raw(v.data(), v.size() * sizeof(std::uint32_t));
    return v;
  }
};

}  // namespace

void save_index(const CorpusIndex& index, const std::string& path) {
  Writer w(path);
  w.u32(kCacheMagic);
  w.u32(kCacheVersion);
  w.u32(kEndianMark);
  w.str(kTokenizerVersion);
  w.names(index.user_names);
  w.names(index.community_names);
  w.names(index.token_names);
  w.u64(index.posts.size());
  for (const Post& p : index.posts) {
    w.i64(p.time);
    w.u32(p.user);
    w.u32(p.community);
    w.i64(p.feedback);
    w.u64(p.tok_begin);
    w.u64(p.tok_end);
  }
  w.vec_u32(index.token_buf);
  w.u64(index.user_data.size());
  for (const UserRecord& u : index.user_data) w.vec_u32(u.posts);
  w.u64(index.community_data.size());
  for (const CommunityRecord& c : index.community_data) {
    w.i64(c.creation_time);
    w.u64(c.members.size());
    for (const Member& m : c.members) {
      w.u32(m.user);
      w.i64(m.first_post);
    }
    w.vec_u32(c.posts);
  }
  w.out.flush();
  if (!w.out) throw UserError("I/O error while writing index cache: " + path);
}

CorpusIndex load_index(const std::string& path) {
  Reader r(path);
  if (r.u32() != kCacheMagic) throw DataError("not an index cache: " + path);
  if (r.u32() != kCacheVersion) throw DataError("unsupported index cache version");
  if (r.u32() != kEndianMark) throw DataError("index cache endianness mismatch");
  if (r.str() != kTokenizerVersion) throw DataError("index cache tokenizer mismatch");
  CorpusIndex index;
  index.user_names = r.names();
  index.community_names = r.names();
  index.token_names = r.names();
  index.posts.resize(r.u64());
  for (Post& p : index.posts) {
    p.time = r.i64();
    p.user = r.u32();
    p.community = r.u32();
    p.feedback = r.i64();
    p.tok_begin = r.u64();
    p.tok_end = r.u64();
  }
  index.token_buf = r.vec_u32();
  index.user_data.resize(r.u64());
  for (UserRecord& u : index.user_data) u.posts = r.vec_u32();
  index.community_data.resize(r.u64());
  for (CommunityRecord& c : index.community_data) {
    c.creation_time = r.i64();
    c.members.resize(r.u64());
    for (Member& m : c.members) {
      m.user = r.u32();
      m.first_post = r.i64();
    }
    c.posts = r.vec_u32();
  }
  return index;
}

}  // namespace commgen
