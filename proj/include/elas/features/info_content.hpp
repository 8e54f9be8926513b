#ifndef ELAS_FEATURES_INFO_CONTENT_HPP
#define ELAS_FEATURES_INFO_CONTENT_HPP

#include <array>
#include <cmath>

#include "elas/core/random.hpp"
#include "elas/features/common.hpp"

namespace elas::features {

/// Symbols of the walk: down (-1), flat (0), up (+1), or unknown when either
/// end of the step has no output.
enum class Symbol : int { Down = 0, Flat = 1, Up = 2, Missing = 3 };

/// Slopes of consecutive tour steps; nullopt where an output is missing.
struct Walk {
  std::vector<std::optional<double>> slopes;
  bool has_missing = false;
};

inline Walk make_walk(const SampleSet& s, const std::vector<std::size_t>& tour, const Metric& metric) {
  Walk w;
  for (std::size_t i = 0; i + 1 < tour.size(); ++i) {
    const auto a = tour[i], b = tour[i + 1];
    if (!s.outputs[a] || !s.outputs[b]) {
      w.slopes.emplace_back(std::nullopt);
      w.has_missing = true;
      continue;
    }
    const double dy = *s.outputs[b] - *s.outputs[a];
    const double dx = metric(s.points[a], s.points[b]);
    if (dy == 0.0) w.slopes.emplace_back(0.0);
    else if (dx == 0.0) w.slopes.emplace_back(dy > 0 ? kInf : -kInf);
    else w.slopes.emplace_back(dy / dx);
  }
  return w;
}

inline std::vector<Symbol> symbols(const Walk& w, double eps) {
  std::vector<Symbol> psi;
  psi.reserve(w.slopes.size());
  for (const auto& s : w.slopes) {
    if (!s) psi.push_back(Symbol::Missing);
    else if (*s < -eps) psi.push_back(Symbol::Down);
    else if (*s > eps) psi.push_back(Symbol::Up);
    else psi.push_back(Symbol::Flat);
  }
  return psi;
}

/// H = -sum_{i != j} p_ij log_b p_ij over consecutive symbol blocks; base 6,
/// or 12 when unknown symbols can occur.
inline double entropy(const std::vector<Symbol>& psi, bool with_missing) {
  if (psi.size() < 2) return kNanOut;
  std::array<std::array<double, 4>, 4> count{};
  for (std::size_t i = 0; i + 1 < psi.size(); ++i) count[static_cast<int>(psi[i])][static_cast<int>(psi[i + 1])] += 1.0;
  const double blocks = static_cast<double>(psi.size() - 1);
  const double log_base = std::log(with_missing ? 12.0 : 6.0);
  double h = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      if (a != b && count[a][b] > 0) {
        const double p = count[a][b] / blocks;
        h -= p * std::log(p) / log_base;
      }
  return h;
}

/// M = |Psi'| / (N - 1), Psi' being Psi without flat symbols and repeats.
inline double partial_information(const std::vector<Symbol>& psi) {
  std::size_t len = 0;
  Symbol last = Symbol::Flat;
  for (auto s : psi) {
    if (s == Symbol::Flat) continue;
    if (len == 0 || s != last) ++len;
    last = s;
  }
  return static_cast<double>(len) / static_cast<double>(psi.size());
}

inline std::vector<double> epsilon_grid(const FeatureConfig& cfg) {
  std::vector<double> g{0.0};
  const int n = cfg.ic_grid_points;
  for (int i = 0; i < n; ++i) {
    const double t = n == 1 ? cfg.ic_log_lo : cfg.ic_log_lo + (cfg.ic_log_hi - cfg.ic_log_lo) * i / (n - 1);
    g.push_back(std::pow(10.0, t));
  }
  return g;
}

/// h_max, eps_s, eps_max, m0, eps_ratio over a seeded random tour.
/// Needs at least 3 points; m0 and eps_ratio need all outputs known.
inline FeatureList info_content_features(const SampleSet& s, const Metric& metric, const FeatureConfig& cfg,
                                         std::uint64_t seed) {
  FeatureList out{{"ic.h_max", kNanOut}, {"ic.eps_s", kNanOut}, {"ic.eps_max", kNanOut},
                  {"ic.m0", kNanOut},    {"ic.eps_ratio", kNanOut}};
  if (s.size() < 3) return out;
  Rng rng(seed);
  const auto tour = random_permutation(s.size(), rng);
  const Walk walk = make_walk(s, tour, metric);
  const auto grid = epsilon_grid(cfg);

  double h_max = -1.0, eps_max = kNanOut, eps_s = kNanOut;
  std::vector<double> partial;
  for (double eps : grid) {
    const auto psi = symbols(walk, eps);
    const double h = entropy(psi, walk.has_missing);
    if (h > h_max) {
      h_max = h;
      eps_max = eps;
    }
    if (std::isnan(eps_s) && h < cfg.ic_settling) eps_s = std::log10(eps);
    if (!walk.has_missing) partial.push_back(partial_information(psi));
  }
  out[0].value = h_max;
  out[1].value = eps_s;
  out[2].value = eps_max;
  if (!walk.has_missing) {
    const double m0 = partial.front();
    out[3].value = m0;
    for (std::size_t i = grid.size(); i-- > 0;)
      if (partial[i] > cfg.ic_partial_ratio * m0) {
        out[4].value = std::log10(grid[i]);
        break;
      }
  }
  return out;
}

}  // namespace elas::features

#endif  // ELAS_FEATURES_INFO_CONTENT_HPP
