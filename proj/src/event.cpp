#include "commgen/event.hpp"

#include <omp.h>

#include <charconv>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string_view>

namespace commgen {

namespace {

// Splits a line on raw tabs. Escaped tabs inside text fields were turned into
// "\t" two-character sequences by the writer, so raw tabs are separators.
bool split_fields(std::string_view line, std::string_view (&out)[6]) {
  std::size_t field = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == '\t') {
      if (field >= 6) return false;
      out[field++] = line.substr(start, i - start);
      start = i + 1;
    }
  }
  return field == 6;
}

bool unescape_text(std::string_view s, std::string& out) {
  out.clear();
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c != '\\') {
      out.push_back(c);
      continue;
    }
    if (++i == s.size()) return false;
    switch (s[i]) {
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      case '\\': out.push_back('\\'); break;
      default: return false;
    }
  }
  return true;
}

bool parse_int(std::string_view s, std::int64_t& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

bool id_ok(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (static_cast<unsigned char>(c) < 0x20 || c == 0x7f) return false;
  return true;
}

std::optional<Event> parse_line(std::string_view line) {
  std::string_view f[6];
  if (!split_fields(line, f)) return std::nullopt;
  Event ev;
  std::int64_t ts = 0;
  if (!id_ok(f[0]) || !id_ok(f[1])) return std::nullopt;
  if (!parse_int(f[2], ts) || ts <= 0) return std::nullopt;
  if (!parse_int(f[5], ev.feedback)) return std::nullopt;
  if (!unescape_text(f[3], ev.title)) return std::nullopt;
  if (!unescape_text(f[4], ev.body)) return std::nullopt;
  ev.user = std::string(f[0]);
  ev.community = std::string(f[1]);
  ev.time = ts;
  return ev;
}

}  // namespace

std::string escape_text(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\\': out += "\\\\"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::vector<Event> parse_events(std::istream& in, ParseStats* stats) {
  if (!in) throw UserError("event stream unreadable");

  std::string line;
  if (!std::getline(in, line)) throw UserError("empty event stream, missing schema header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kEventSchemaHeader)
    throw UserError("unsupported event schema header: expected \"" +
                    std::string(kEventSchemaHeader) + "\"");

  // Lines are independent, so batches parse in parallel and results are
  // collected by line position to keep input order.
  std::vector<std::string> batch;
  std::vector<Event> events;
  ParseStats st;

  auto flush = [&](std::vector<std::string>& lines) {
    std::vector<std::optional<Event>> parsed(lines.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(lines.size()); ++i)
      parsed[i] = parse_line(lines[i]);
    for (auto& p : parsed) {
      if (p)
        events.push_back(std::move(*p));
      else
        ++st.skipped;
    }
    lines.clear();
  };

  constexpr std::size_t kBatch = 1 << 14;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++st.data_lines;
    batch.push_back(line);
    if (batch.size() >= kBatch) flush(batch);
  }
  flush(batch);

  if (in.bad()) throw UserError("I/O error while reading event stream");
  if (st.data_lines > 0 && 2 * st.skipped > st.data_lines)
    throw UserError("event stream is more than half malformed (" +
                    std::to_string(st.skipped) + " of " + std::to_string(st.data_lines) +
                    " lines)");
  if (stats) *stats = st;
  return events;
}

std::vector<Event> read_events_file(const std::string& path, ParseStats* stats) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UserError("cannot open event file: " + path);
  return parse_events(in, stats);
}

void write_events(std::ostream& out, const std::vector<Event>& events) {
  out << kEventSchemaHeader << '\n';
  for (const Event& ev : events) {
    out << ev.user << '\t' << ev.community << '\t' << ev.time << '\t'
        << escape_text(ev.title) << '\t' << escape_text(ev.body) << '\t'
        << ev.feedback << '\n';
  }
}

void write_events_file(const std::string& path, const std::vector<Event>& events) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UserError("cannot open for writing: " + path);
  write_events(out, events);
  out.flush();
  if (!out) throw UserError("I/O error while writing: " + path);
}

}  // namespace commgen
