#ifndef ELAS_ANALYSIS_ROBUSTNESS_HPP
#define ELAS_ANALYSIS_ROBUSTNESS_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "elas/core/error.hpp"
#include "elas/core/stats.hpp"

namespace elas::analysis {

/// How the low percentile of a group is taken: interpolated P1, or the
/// smallest value (the first order statistic).
enum class LowPercentile { Interpolated, Minimum };

struct RobustnessOptions {
  double delta = 0.05;
  LowPercentile low = LowPercentile::Interpolated;
};

/// Share of groups whose standardized P100 - P1 spread is at most delta.
/// Standardization uses the mean and std of all finite values; groups holding
/// a NAN_OUT are left out entirely.
inline double robustness(const std::vector<std::vector<double>>& groups, const RobustnessOptions& opt = {}) {
  require(!groups.empty(), ErrorCode::EmptyInput, "robustness needs at least one group");
  std::vector<double> finite;
  for (const auto& g : groups) {
    require(!g.empty(), ErrorCode::EmptyInput, "robustness: empty group");
    for (double v : g)
      if (std::isfinite(v)) finite.push_back(v);
  }
  const double mu = finite.empty() ? 0.0 : stats::mean(finite);
  double sd = finite.size() < 2 ? 0.0 : stats::sample_std(finite);
  if (!(sd > 0.0)) sd = 1.0;  // constant feature: any spread is already zero

  int used = 0, robust = 0;
  for (const auto& g : groups) {
    if (std::any_of(g.begin(), g.end(), [](double v) { return std::isnan(v); })) continue;
    ++used;
    std::vector<double> z;
    for (double v : g) z.push_back((v - mu) / sd);
    const double hi = *std::max_element(z.begin(), z.end());
    const double lo = opt.low == LowPercentile::Minimum ? *std::min_element(z.begin(), z.end())
                                                       : stats::quantile(z, 0.01);
    // equal infinities count as no spread
    const double spread = hi == lo ? 0.0 : hi - lo;
    if (spread <= opt.delta) ++robust;
  }
  return used ? static_cast<double>(robust) / used : std::numeric_limits<double>::quiet_NaN();
}

/// Share of NAN_OUT values.
inline double nan_rate(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  const auto n = std::count_if(values.begin(), values.end(), [](double v) { return std::isnan(v); });
  return static_cast<double>(n) / static_cast<double>(values.size());
}

struct PointCountCase {
  std::size_t n_points = 0;
  bool nanout = false;
};

/// Smallest N such that cases with at least N points are NAN_OUT at most
/// `max_rate` of the time; nullopt when no N qualifies.
inline std::optional<std::size_t> estimate_n_nanout(const std::vector<PointCountCase>& cases, double max_rate = 0.01) {
  require(!cases.empty(), ErrorCode::EmptyInput, "estimate_n_nanout needs cases");
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> by_n;  // n -> (total, nanout)
  for (const auto& c : cases) {
    auto& [total, bad] = by_n[c.n_points];
    ++total;
    bad += c.nanout;
  }
  // suffix sums over descending n
  std::vector<std::pair<std::size_t, double>> rate;
  std::size_t total = 0, bad = 0;
  for (auto it = by_n.rbegin(); it != by_n.rend(); ++it) {
    total += it->second.first;
    bad += it->second.second;
    rate.emplace_back(it->first, static_cast<double>(bad) / static_cast<double>(total));
  }
  std::optional<std::size_t> best;
  for (const auto& [n, r] : rate)
    if (r <= max_rate) best = n;  // rate runs from large n to small n
  return best;
}

struct FeatureRobustness {
  double robustness = 0.0;
  double nan_rate = 0.0;
  std::optional<std::size_t> n_nanout;  // nullopt: NOT_REACHED
};

using RobustnessReport = std::map<std::string, FeatureRobustness>;

}  // namespace elas::analysis

#endif  // ELAS_ANALYSIS_ROBUSTNESS_HPP
