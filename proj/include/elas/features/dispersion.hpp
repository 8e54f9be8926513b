#ifndef ELAS_FEATURES_DISPERSION_HPP
#define ELAS_FEATURES_DISPERSION_HPP

#include "elas/core/stats.hpp"
#include "elas/features/common.hpp"

namespace elas::features {

namespace detail {
inline std::vector<double> pairwise(const std::vector<const Point*>& pts, const Metric& metric) {
  std::vector<double> d;
  d.reserve(pts.size() * (pts.size() - (pts.empty() ? 0 : 1)) / 2);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) d.push_back(metric(*pts[i], *pts[j]));
  return d;
}
}  // namespace detail

/// {ratio,diff}_{mean,median}_<q>: distances among the points with
/// y <= Q_q(y) against distances among all points (unordered pairs).
inline FeatureList dispersion_features(const SampleSet& s, const Metric& metric,
                                       const std::vector<double>& quantiles = {0.02, 0.05, 0.1, 0.25}) {
  FeatureList out;
  std::vector<const Point*> all;
  for (const auto& p : s.points) all.push_back(&p);
  const auto d_all = detail::pairwise(all, metric);
  const auto ys = s.known_outputs();
  const double mean_all = d_all.empty() ? kNanOut : stats::mean(d_all);
  const double med_all = d_all.empty() ? kNanOut : stats::median(d_all);
  for (double q : quantiles) {
    double mean_q = kNanOut, med_q = kNanOut;
    if (!ys.empty() && !d_all.empty()) {
      const double thr = stats::quantile(ys, q);
      std::vector<const Point*> sub;
      for (std::size_t i = 0; i < s.size(); ++i)
        if (s.outputs[i] && *s.outputs[i] <= thr) sub.push_back(&s.points[i]);
      if (sub.size() >= 2) {
        const auto d_q = detail::pairwise(sub, metric);
        mean_q = stats::mean(d_q);
        med_q = stats::median(d_q);
      }
    }
    const auto tag = quantile_tag(q);
    out.push_back({"disp.ratio_mean_" + tag, safe_ratio(mean_q, mean_all)});
    out.push_back({"disp.ratio_median_" + tag, safe_ratio(med_q, med_all)});
    out.push_back({"disp.diff_mean_" + tag, mean_q - mean_all});
    out.push_back({"disp.diff_median_" + tag, med_q - med_all});
  }
  return out;
}

}  // namespace elas::features

#endif  // ELAS_FEATURES_DISPERSION_HPP
