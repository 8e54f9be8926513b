#ifndef ELAS_FEATURES_YDIST_HPP
#define ELAS_FEATURES_YDIST_HPP

#include <algorithm>
#include <cmath>

#include "elas/core/stats.hpp"
#include "elas/features/common.hpp"

namespace elas::features {

/// Silverman's rule of thumb, with the usual fallbacks for degenerate spread.
inline double silverman_bandwidth(const std::vector<double>& y) {
  const double sd = stats::sample_std(y);
  const double iqr = stats::quantile(y, 0.75) - stats::quantile(y, 0.25);
  double lo = std::min(sd, iqr / 1.34);
  if (lo <= 0.0) lo = sd;
  if (lo <= 0.0) lo = std::abs(y.front());
  if (lo <= 0.0) lo = 1.0;
  return 0.9 * lo * std::pow(static_cast<double>(y.size()), -0.2);
}

/// Strict interior local maxima of a Gaussian KDE on an equidistant grid.
inline int kde_peaks(const std::vector<double>& y, int grid) {
  const double h = silverman_bandwidth(y);
  const auto [mn, mx] = std::minmax_element(y.begin(), y.end());
  const double lo = *mn - 3.0 * h, hi = *mx + 3.0 * h;
  std::vector<double> dens(static_cast<std::size_t>(grid), 0.0);
  for (int g = 0; g < grid; ++g) {
    const double t = lo + (hi - lo) * g / (grid - 1);
    double acc = 0.0;
    for (double v : y) {
      const double u = (t - v) / h;
      acc += std::exp(-0.5 * u * u);
    }
    dens[static_cast<std::size_t>(g)] = acc;
  }
  int peaks = 0;
  for (std::size_t g = 1; g + 1 < dens.size(); ++g) peaks += dens[g] > dens[g - 1] && dens[g] > dens[g + 1];
  return peaks;
}

/// skewness (m3/m2^1.5), kurtosis (m4/m2^2, not excess) and KDE peak count.
inline FeatureList ydist_features(const std::vector<double>& y, const FeatureConfig& cfg = {}) {
  FeatureList out{{"ydist.skewness", kNanOut}, {"ydist.kurtosis", kNanOut}, {"ydist.number_of_peaks", kNanOut}};
  if (y.size() < 3) return out;
  if (std::any_of(y.begin(), y.end(), [](double v) { return !std::isfinite(v); })) return out;
  const double m = stats::mean(y);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : y) {
    const double c = v - m;
    m2 += c * c;
    m3 += c * c * c;
    m4 += c * c * c * c;
  }
  const double n = static_cast<double>(y.size());
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (m2 > 0.0) {
    out[0].value = m3 / std::pow(m2, 1.5);
    out[1].value = m4 / (m2 * m2);
  }
  out[2].value = kde_peaks(y, cfg.kde_grid);
  return out;
}

}  // namespace elas::features

#endif  // ELAS_FEATURES_YDIST_HPP
