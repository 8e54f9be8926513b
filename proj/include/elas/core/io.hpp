#ifndef ELAS_CORE_IO_HPP
#define ELAS_CORE_IO_HPP

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "elas/core/error.hpp"
#include "elas/core/types.hpp"

namespace elas::io {

using json = nlohmann::json;

/// Shortest round-trip decimal representation; "inf", "-inf", "nan" for
/// non-finite values.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error(ErrorCode::Io, "cannot format double");
  return std::string(buf, ptr);
}

inline double parse_double(std::string_view s) {
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error(ErrorCode::Io, "cannot parse number '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

/// Writes through a temporary file and renames it into place.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out) throw Error(ErrorCode::Io, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// SampleSet CSV: header x1..xd,y; a missing output is an empty field.

inline std::string sample_set_to_csv(const SampleSet& s, Eigen::Index dim = -1) {
  const auto d = dim >= 0 ? dim : s.dim();
  std::string out;
  for (Eigen::Index j = 0; j < d; ++j) out += "x" + std::to_string(j + 1) + ",";
  out += "y\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) out += format_double(s.points[i](j)) + ",";
    if (s.outputs[i]) out += format_double(*s.outputs[i]);
    out += "\n";
  }
  return out;
}

inline SampleSet sample_set_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Io, "empty sample-set CSV");
  const auto header = split_csv_line(line);
  require(!header.empty() && header.back() == "y", ErrorCode::Io, "sample-set CSV must end with column y");
  const auto d = static_cast<Eigen::Index>(header.size() - 1);
  SampleSet s;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    require(static_cast<Eigen::Index>(f.size()) == d + 1, ErrorCode::Io, "malformed sample-set row: " + line);
    Point x(d);
    for (Eigen::Index j = 0; j < d; ++j) x(j) = parse_double(f[static_cast<std::size_t>(j)]);
    s.push_back(std::move(x), f.back().empty() ? kMissing : Output(parse_double(f.back())));
  }
  return s;
}

inline json vector_to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline Vector vector_from_json(const json& a) {
  Vector v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
  return v;
}

inline json matrix_to_json(const Matrix& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vector_to_json(m.row(i).transpose()));
  return a;
}

inline Matrix matrix_from_json(const json& a) {
  const auto n = static_cast<Eigen::Index>(a.size());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    require(a[static_cast<std::size_t>(i)].size() == a.size(), ErrorCode::Io, "covariance must be square");
    m.row(i) = vector_from_json(a[static_cast<std::size_t>(i)]).transpose();
  }
  return m;
}

/// {m, sigma, C, p_sigma, p_c, g, n_r}
inline json state_to_json(const DistributionState& s) {
  json j;
  j["m"] = vector_to_json(s.mean);
  j["sigma"] = s.sigma;
  j["C"] = matrix_to_json(s.cov);
  j["p_sigma"] = vector_to_json(s.p_sigma);
  j["p_c"] = vector_to_json(s.p_c);
  j["g"] = s.generation;
  j["n_r"] = s.restarts;
  return j;
}

inline DistributionState state_from_json(const json& j) {
  DistributionState s;
  try {
    s.mean = vector_from_json(j.at("m"));
    s.sigma = j.at("sigma").get<double>();
    s.cov = matrix_from_json(j.at("C"));
    s.p_sigma = vector_from_json(j.at("p_sigma"));
    s.p_c = vector_from_json(j.at("p_c"));
    s.generation = j.at("g").get<long>();
    s.restarts = j.at("n_r").get<long>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, std::string("malformed distribution state: ") + e.what());
  }
  validate(s);
  return s;
}

}  // namespace elas::io

#endif  // ELAS_CORE_IO_HPP
