#ifndef ELAS_TSS_HPP
#define ELAS_TSS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "elas/core/transform.hpp"
#include "elas/core/types.hpp"

namespace elas::tss {

enum class Method { Full, Knn, Nearest };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::Full: return "full";
    case Method::Knn: return "knn";
    case Method::Nearest: return "nearest";
  }
  return "?";
}

struct TssSpec {
  Method method = Method::Full;
  std::optional<int> k;          // Knn
  std::optional<int> n_max;      // Nearest
  std::optional<double> r_max;   // Nearest, in the sigma^2 C metric

  static TssSpec full() { return {}; }
  static TssSpec knn(int k) { return {Method::Knn, k, {}, {}}; }
  static TssSpec nearest(int n_max, double r_max) { return {Method::Nearest, {}, n_max, r_max}; }

  /// Nearest with N_max = 20 d and r_max = 4 sqrt(d).
  static TssSpec nearest_default(Eigen::Index d) {
    return nearest(20 * static_cast<int>(d), 4.0 * std::sqrt(static_cast<double>(d)));
  }

  std::string name() const { return to_string(method); }
};

inline nlohmann::json to_json(const TssSpec& s) {
  nlohmann::json j{{"method", to_string(s.method)}};
  if (s.k) j["k"] = *s.k;
  if (s.n_max) j["N_max"] = *s.n_max;
  if (s.r_max) j["r_max"] = *s.r_max;
  return j;
}

inline TssSpec tss_from_json(const nlohmann::json& j) {
  TssSpec s;
  const auto m = j.at("method").get<std::string>();
  if (m == "full") {
    s.method = Method::Full;
  } else if (m == "knn") {
    s.method = Method::Knn;
    if (j.contains("k")) s.k = j["k"].get<int>();
  } else if (m == "nearest") {
    s.method = Method::Nearest;
    if (j.contains("N_max")) s.n_max = j["N_max"].get<int>();
    if (j.contains("r_max")) s.r_max = j["r_max"].get<double>();
  } else {
    throw Error(ErrorCode::Config, "unknown TSS method '" + m + "'");
  }
  return s;
}

/// T = A.
inline SampleSet tss_full(const SampleSet& archive) { return archive; }

namespace detail {

/// Archive indices ordered by distance to q; ties broken by lower index.
inline std::vector<std::size_t> nearest_order(const std::vector<std::size_t>& candidates, const SampleSet& archive,
                                              const Point& q, const Metric& metric) {
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(candidates.size());
  for (auto i : candidates) dist.emplace_back(metric(archive.points[i], q), i);
  std::sort(dist.begin(), dist.end());
  std::vector<std::size_t> out;
  out.reserve(dist.size());
  for (const auto& [dv, i] : dist) out.push_back(i);
  return out;
}

inline std::vector<std::size_t> union_of_prefixes(const std::vector<std::vector<std::size_t>>& orders, std::size_t k,
                                                  std::size_t archive_size) {
  std::vector<char> mark(archive_size, 0);
  for (const auto& o : orders)
    for (std::size_t i = 0; i < std::min(k, o.size()); ++i) mark[o[i]] = 1;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < archive_size; ++i)
    if (mark[i]) idx.push_back(i);
  return idx;
}

}  // namespace detail

/// Union over queries of the k nearest archive points (archive order kept).
inline std::vector<std::size_t> knn_indices(const SampleSet& archive, const std::vector<Point>& queries, int k,
                                            const Metric& metric) {
  require(k >= 1, ErrorCode::InvalidArgument, "k must be >= 1");
  std::vector<std::size_t> all(archive.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (archive.size() <= static_cast<std::size_t>(k)) return all;
  std::vector<std::vector<std::size_t>> orders;
  for (const auto& q : queries) orders.push_back(detail::nearest_order(all, archive, q, metric));
  return detail::union_of_prefixes(orders, static_cast<std::size_t>(k), archive.size());
}

inline SampleSet tss_knn(const SampleSet& archive, const std::vector<Point>& queries, int k, const Metric& metric) {
  return archive.select(knn_indices(archive, queries, k, metric));
}

inline SampleSet tss_knn(const SampleSet& archive, const std::vector<Point>& queries, int k,
                         const DistributionState& state) {
  return tss_knn(archive, queries, k, Metric::mahalanobis(state));
}

/// Points within r_max of `center`, then the union of per-query k-nearest
/// with the largest k whose union has at most n_max points (at least k = 1).
inline std::vector<std::size_t> nearest_indices(const SampleSet& archive, const std::vector<Point>& queries, int n_max,
                                                double r_max, const Point& center, const Metric& metric) {
  require(n_max >= 1, ErrorCode::InvalidArgument, "N_max must be >= 1");
  require(r_max > 0.0, ErrorCode::InvalidArgument, "r_max must be positive");
  std::vector<std::size_t> within;
  for (std::size_t i = 0; i < archive.size(); ++i)
    if (metric(archive.points[i], center) <= r_max) within.push_back(i);
  require(!within.empty(), ErrorCode::EmptySelection, "no archive point within r_max of the mean");
  std::vector<std::vector<std::size_t>> orders;
  for (const auto& q : queries) orders.push_back(detail::nearest_order(within, archive, q, metric));
  auto best = detail::union_of_prefixes(orders, 1, archive.size());
  for (std::size_t k = 2; k <= within.size(); ++k) {
    auto u = detail::union_of_prefixes(orders, k, archive.size());
    if (u.size() > static_cast<std::size_t>(n_max)) break;
    best = std::move(u);
  }
  return best;
}

inline SampleSet tss_nearest(const SampleSet& archive, const std::vector<Point>& queries, int n_max, double r_max,
                             const DistributionState& state) {
  return archive.select(nearest_indices(archive, queries, n_max, r_max, state.mean, Metric::mahalanobis(state)));
}

/// Applies a TssSpec with the sigma^2 C metric of `state`.
inline SampleSet select(const TssSpec& spec, const SampleSet& archive, const std::vector<Point>& queries,
                        const DistributionState& state) {
  const auto d = state.dim();
  switch (spec.method) {
    case Method::Full:
      return tss_full(archive);
    case Method::Knn: {
      require(!archive.empty(), ErrorCode::EmptySelection, "empty archive");
      const int k = spec.k.value_or(static_cast<int>(2 * (d * (d + 3) / 2 + 1)));
      return tss_knn(archive, queries, k, state);
    }
    case Method::Nearest: {
      const auto def = TssSpec::nearest_default(d);
      return tss_nearest(archive, queries, spec.n_max.value_or(*def.n_max), spec.r_max.value_or(*def.r_max), state);
    }
  }
  return archive;
}

}  // namespace elas::tss

#endif  // ELAS_TSS_HPP
