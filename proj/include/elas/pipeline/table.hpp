#ifndef ELAS_PIPELINE_TABLE_HPP
#define ELAS_PIPELINE_TABLE_HPP

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "elas/core/io.hpp"
#include "elas/features/common.hpp"

namespace elas::pipeline {

/// Plain comma-separated table; fields never contain commas or newlines.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw Error(ErrorCode::Config, "table has no column '" + name + "'");
  }

  bool has_column(const std::string& name) const {
    return std::find(header.begin(), header.end(), name) != header.end();
  }

  std::string to_csv() const {
    std::string out = join(header) + "\n";
    for (const auto& r : rows) out += join(r) + "\n";
    return out;
  }

  static Table parse(const std::string& text) {
    Table t;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::Io, "empty table");
    t.header = io::split_csv_line(line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto f = io::split_csv_line(line);
      require(f.size() == t.header.size(), ErrorCode::Io, "ragged table row: " + line);
      t.rows.push_back(std::move(f));
    }
    return t;
  }

  static std::string join(const std::vector<std::string>& f) {
    std::string s;
    for (std::size_t i = 0; i < f.size(); ++i) s += (i ? "," : "") + f[i];
    return s;
  }
};

/// Keeps free text inside one CSV field.
inline std::string csv_safe(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

/// Feature values: "nanout" for NAN_OUT, "inf"/"-inf", otherwise shortest round trip.
inline std::string format_feature(double v) { return features::is_nanout(v) ? "nanout" : io::format_double(v); }

inline double parse_feature(const std::string& s) { return s == "nanout" ? features::kNanOut : io::parse_double(s); }

}  // namespace elas::pipeline

#endif  // ELAS_PIPELINE_TABLE_HPP
