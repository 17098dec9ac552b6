#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "commgen/common.hpp"

namespace commgen {

// One submission to a community.
struct Event {
  std::string user;
  std::string community;
  Timestamp time = 0;
  std::string title;
  std::string body;       // may be empty
  std::int64_t feedback = 0;  // upvotes minus downvotes

  friend bool operator==(const Event&, const Event&) = default;
};

struct ParseStats {
  std::size_t data_lines = 0;  // non-empty lines after the header
  std::size_t skipped = 0;     // malformed lines skipped
};

// Tab-separated records, one per line:
//   user_id \t community_id \t timestamp \t title \t body \t feedback
// Title/body are backslash-escaped (\t, \n, \r, \\). The first line must be
// the schema-version header below.
inline constexpr const char* kEventSchemaHeader = "#commgen-events v1";

// Parses an event stream. Malformed lines are skipped and counted; a file
// that is more than half malformed, or that lacks the schema header, throws
// UserError.
std::vector<Event> parse_events(std::istream& in, ParseStats* stats = nullptr);
std::vector<Event> read_events_file(const std::string& path, ParseStats* stats = nullptr);

void write_events(std::ostream& out, const std::vector<Event>& events);
void write_events_file(const std::string& path, const std::vector<Event>& events);

std::string escape_text(const std::string& s);

}  // namespace commgen
