#ifndef ELAS_FEATURES_COMMON_HPP
#define ELAS_FEATURES_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "elas/core/transform.hpp"
#include "elas/core/types.hpp"

namespace elas::features {

/// NAN_OUT: the feature cannot be computed on this sample set. Stored as a
/// quiet NaN; +/-inf are ordinary feature values.
inline constexpr double kNanOut = std::numeric_limits<double>::quiet_NaN();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool is_nanout(double v) noexcept { return std::isnan(v); }

struct Feature {
  std::string name;  // "<group>.<name>", e.g. "disp.ratio_mean_02"
  double value = kNanOut;
};

using FeatureList = std::vector<Feature>;

/// a / b with 0/0 -> NAN_OUT and x/0 -> +/-inf.
inline double safe_ratio(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return kNanOut;
  if (b == 0.0) return a == 0.0 ? kNanOut : (a > 0.0 ? kInf : -kInf);
  return a / b;
}

/// Two-digit quantile tag used in feature names: 0.02 -> "02", 0.5 -> "50".
inline std::string quantile_tag(double q) {
  const int v = static_cast<int>(std::lround(q * 100.0));
  return v < 10 ? "0" + std::to_string(v) : std::to_string(v);
}

/// Tunables of the feature sets. Defaults follow the published settings.
struct FeatureConfig {
  std::vector<double> dispersion_quantiles{0.02, 0.05, 0.1, 0.25};
  double ic_settling = 0.05;       // s
  double ic_partial_ratio = 0.5;   // r
  int ic_grid_points = 1000;       // 10^linspace(lo, hi, n), plus eps = 0
  double ic_log_lo = -5.0;
  double ic_log_hi = 15.0;
  std::vector<double> levelset_quantiles{0.1, 0.25, 0.5};
  int levelset_folds = 10;
  int kde_grid = 512;
  std::uint64_t seed = 0;
};

}  // namespace elas::features

#endif  // ELAS_FEATURES_COMMON_HPP
