#ifndef ELAS_FEATURES_NBC_HPP
#define ELAS_FEATURES_NBC_HPP

#include <cmath>

#include "elas/core/stats.hpp"
#include "elas/features/common.hpp"

namespace elas::features {

/// Nearest-neighbour and nearest-better distances on known outputs.
struct NearestBetter {
  std::vector<double> d_nn;                 // per point
  std::vector<std::optional<double>> d_nb;  // nullopt for the best points
  std::vector<double> indegree;             // how often a point is someone's nearest better
};

inline NearestBetter nearest_better(const SampleSet& known, const Metric& metric) {
  const auto n = known.size();
  NearestBetter r{std::vector<double>(n, kInf), std::vector<std::optional<double>>(n), std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    const double yi = *known.outputs[i];
    double best = kInf;
    std::optional<std::size_t> arg;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = metric(known.points[i], known.points[j]);
      r.d_nn[i] = std::min(r.d_nn[i], d);
      if (*known.outputs[j] < yi && d < best) {
        best = d;
        arg = j;
      }
    }
    if (arg) {
      r.d_nb[i] = best;
      r.indegree[*arg] += 1.0;
    }
  }
  return r;
}

/// nb_std_ratio, nb_mean_ratio, nb_cor, dist_ratio (coefficient of variation
/// of d_nn/d_nb), nb_fitness_cor.
inline FeatureList nbc_features(const SampleSet& s, const Metric& metric) {
  FeatureList out{{"nbc.nb_std_ratio", kNanOut},
                  {"nbc.nb_mean_ratio", kNanOut},
                  {"nbc.nb_cor", kNanOut},
                  {"nbc.dist_ratio", kNanOut},
                  {"nbc.nb_fitness_cor", kNanOut}};
  const SampleSet known = s.known();
  if (known.size() < 3) return out;
  const auto nb = nearest_better(known, metric);
  std::vector<double> nb_d, nn_paired, ratio;
  for (std::size_t i = 0; i < known.size(); ++i) {
    if (!nb.d_nb[i]) continue;
    nb_d.push_back(*nb.d_nb[i]);
    nn_paired.push_back(nb.d_nn[i]);
    ratio.push_back(nb.d_nn[i] == 0.0 ? 0.0 : nb.d_nn[i] / *nb.d_nb[i]);
  }
  if (nb_d.empty()) return out;
  out[0].value = safe_ratio(stats::sample_std(nb.d_nn), nb_d.size() < 2 ? kNanOut : stats::sample_std(nb_d));
  out[1].value = safe_ratio(stats::mean(nb.d_nn), stats::mean(nb_d));
  if (nb_d.size() >= 2) {
    out[2].value = stats::pearson(nn_paired, nb_d);
    out[3].value = safe_ratio(stats::sample_std(ratio), stats::mean(ratio));
  }
  const auto y = known.known_outputs();
  out[4].value = -stats::pearson(nb.indegree, y);
  return out;
}

}  // namespace elas::features

#endif  // ELAS_FEATURES_NBC_HPP
