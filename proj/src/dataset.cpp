#include "commgen/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace commgen {

namespace {

std::string format_value(double v) {
  if (std::isnan(v)) return "NA";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_value(const std::string& s) {
  if (s == "NA") return std::nan("");
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw DataError("bad numeric cell in dataset: '" + s + "'");
  return v;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == '\t') {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace

void write_dataset_tsv(const std::string& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UserError("cannot open for writing: " + path);
  const bool has_rate = !ds.rate_target.empty();
  for (const auto& c : ds.id_columns) out << '#' << c << '\t';
  for (const auto& f : ds.feature_names) out << f << '\t';
  out << "label";
  if (has_rate) out << "\trate_target";
  out << '\n';
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    for (const auto& id : ds.ids[r]) out << id << '\t';
    for (std::size_t c = 0; c < ds.cols(); ++c) out << format_value(ds.at(r, c)) << '\t';
    out << format_value(ds.label[r]);
    if (has_rate) out << '\t' << format_value(ds.rate_target[r]);
    out << '\n';
  }
  out.flush();
  if (!out) throw UserError("I/O error while writing: " + path);
}

Dataset read_dataset_tsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UserError("cannot open dataset: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty dataset file: " + path);
  auto header = split_tabs(line);

  Dataset ds;
  std::size_t i = 0;
  while (i < header.size() && !header[i].empty() && header[i][0] == '#') {
    ds.id_columns.push_back(header[i].substr(1));
    ++i;
  }
  bool has_rate = !header.empty() && header.back() == "rate_target";
  std::size_t n_targets = has_rate ? 2 : 1;
  if (header.size() < i + n_targets || header[header.size() - n_targets] != "label")
    throw DataError("dataset header missing label column: " + path);
  for (std::size_t c = i; c + n_targets < header.size(); ++c)
    ds.feature_names.push_back(header[c]);

  const std::size_t want = ds.id_columns.size() + ds.feature_names.size() + n_targets;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_tabs(line);
    if (cells.size() != want) throw DataError("dataset row width mismatch: " + path);
    std::size_t c = 0;
    std::vector<std::string> ids;
    for (std::size_t j = 0; j < ds.id_columns.size(); ++j) ids.push_back(cells[c++]);
    ds.ids.push_back(std::move(ids));
    for (std::size_t j = 0; j < ds.feature_names.size(); ++j)
      ds.x.push_back(parse_value(cells[c++]));
    ds.label.push_back(parse_value(cells[c++]));
    if (has_rate) ds.rate_target.push_back(parse_value(cells[c++]));
  }
  return ds;
}

}  // namespace commgen
