#ifndef ELAS_FEATURES_METAMODEL_HPP
#define ELAS_FEATURES_METAMODEL_HPP

#include <algorithm>
#include <cmath>

#include <Eigen/QR>

#include "elas/features/common.hpp"

namespace elas::features {

enum class RegressionModel { LinSimple, LinInteract, QuadSimple, QuadInteract };

namespace detail {

/// Design row without the intercept column.
inline Vector regression_row(const Point& x, RegressionModel m) {
  const auto d = x.size();
  std::vector<double> v(x.data(), x.data() + d);
  if (m == RegressionModel::LinInteract || m == RegressionModel::QuadInteract)
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = i + 1; j < d; ++j) v.push_back(x[i] * x[j]);
  if (m == RegressionModel::QuadSimple || m == RegressionModel::QuadInteract)
    for (Eigen::Index i = 0; i < d; ++i) v.push_back(x[i] * x[i]);
  return Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

struct RegressionFit {
  Vector coef;  // intercept first
  double adj_r2 = kNanOut;
  bool full_rank = false;
};

inline RegressionFit fit_regression(const SampleSet& known, RegressionModel m) {
  RegressionFit fit;
  const auto n = static_cast<Eigen::Index>(known.size());
  if (n == 0) return fit;
  const auto p = regression_row(known.points.front(), m).size();
  if (n <= p + 1) return fit;
  Matrix a(n, p + 1);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    a.row(i).tail(p) = regression_row(known.points[static_cast<std::size_t>(i)], m).transpose();
    y[i] = *known.outputs[static_cast<std::size_t>(i)];
  }
  const Eigen::ColPivHouseholderQR<Matrix> qr(a);
  fit.coef = qr.solve(y);
  fit.full_rank = qr.rank() == p + 1;
  const double ybar = y.mean();
  const double sst = (y.array() - ybar).square().sum();
  if (sst <= 0.0) return fit;
  const double sse = (a * fit.coef - y).squaredNorm();
  const double r2 = 1.0 - sse / sst;
  fit.adj_r2 = 1.0 - (1.0 - r2) * static_cast<double>(n - 1) / static_cast<double>(n - p - 1);
  return fit;
}

}  // namespace detail

/// Adjusted R^2 of four least-squares models, the spread of the linear
/// slopes, and the condition of the pure quadratic terms.
inline FeatureList metamodel_features(const SampleSet& s) {
  const SampleSet known = s.known();
  const auto lin = detail::fit_regression(known, RegressionModel::LinSimple);
  const auto lin_i = detail::fit_regression(known, RegressionModel::LinInteract);
  const auto quad = detail::fit_regression(known, RegressionModel::QuadSimple);
  const auto quad_i = detail::fit_regression(known, RegressionModel::QuadInteract);

  double coef_min = kNanOut, coef_max = kNanOut, coef_ratio = kNanOut;
  if (lin.full_rank) {
    const Vector slopes = lin.coef.tail(lin.coef.size() - 1).cwiseAbs();
    coef_min = slopes.minCoeff();
    coef_max = slopes.maxCoeff();
    coef_ratio = coef_min == 0.0 ? (coef_max == 0.0 ? kNanOut : kInf) : coef_max / coef_min;
  }
  double cond = kNanOut;
  if (quad.full_rank) {
    const auto d = known.dim();
    const Vector sq = quad.coef.tail(d).cwiseAbs();
    cond = safe_ratio(sq.maxCoeff(), sq.minCoeff());
  }
  return {{"mm.lin_simple_adj_r2", lin.adj_r2},
          {"mm.lin_simple_coef_min", coef_min},
          {"mm.lin_simple_coef_max", coef_max},
          {"mm.lin_simple_coef_max_by_min", coef_ratio},
          {"mm.lin_w_interact_adj_r2", lin_i.adj_r2},
          {"mm.quad_simple_adj_r2", quad.adj_r2},
          {"mm.quad_simple_cond", cond},
          {"mm.quad_w_interact_adj_r2", quad_i.adj_r2}};
}

}  // namespace elas::features

#endif  // ELAS_FEATURES_METAMODEL_HPP
