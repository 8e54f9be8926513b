#ifndef ELAS_CORE_OPTIM_HPP
#define ELAS_CORE_OPTIM_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "elas/core/types.hpp"

namespace elas::optim {

struct NelderMeadOptions {
  int max_evaluations = 400;
  double f_tol = 1e-9;
  double x_tol = 1e-8;
  double initial_step = 0.5;
};

struct NelderMeadResult {
  Vector x;
  double value = std::numeric_limits<double>::infinity();
  int evaluations = 0;
  /// Best value after each iteration; nonincreasing.
  std::vector<double> trace;
};

/// Derivative-free minimisation (standard reflection/expansion/contraction/shrink).
/// Non-finite objective values are treated as +inf.
inline NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& f, const Vector& x0,
                                    const NelderMeadOptions& opt = {}) {
  const auto n = x0.size();
  NelderMeadResult res;
  auto eval = [&](const Vector& x) {
    ++res.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<Vector> simplex(static_cast<std::size_t>(n + 1), x0);
  std::vector<double> values(static_cast<std::size_t>(n + 1));
  values[0] = eval(x0);
  for (Eigen::Index i = 0; i < n; ++i) {
    simplex[static_cast<std::size_t>(i + 1)](i) += opt.initial_step;
    values[static_cast<std::size_t>(i + 1)] = eval(simplex[static_cast<std::size_t>(i + 1)]);
  }

  std::vector<std::size_t> order(simplex.size());
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<Vector> s2;
    std::vector<double> v2;
    for (auto i : order) {
      s2.push_back(simplex[i]);
      v2.push_back(values[i]);
    }
    simplex = std::move(s2);
    values = std::move(v2);
  };

  sort_simplex();
  res.trace.push_back(values.front());
  const std::size_t last = simplex.size() - 1;
  while (res.evaluations < opt.max_evaluations) {
    if (n == 0) break;
    const double spread = values[last] - values[0];
    double size = 0.0;
    for (std::size_t i = 1; i < simplex.size(); ++i) size = std::max(size, (simplex[i] - simplex[0]).cwiseAbs().maxCoeff());
    if (std::isfinite(spread) && spread <= opt.f_tol * (1.0 + std::abs(values[0])) && size <= opt.x_tol) break;
    if (size <= opt.x_tol * 1e-3) break;

    Vector centroid = Vector::Zero(n);
    for (std::size_t i = 0; i < last; ++i) centroid += simplex[i];
    centroid /= static_cast<double>(n);

    const Vector xr = centroid + (centroid - simplex[last]);
    const double fr = eval(xr);
    if (fr < values[0]) {
      const Vector xe = centroid + 2.0 * (centroid - simplex[last]);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[last] = xe;
        values[last] = fe;
      } else {
        simplex[last] = xr;
        values[last] = fr;
      }
    } else if (fr < values[last - 1]) {
      simplex[last] = xr;
      values[last] = fr;
    } else {
      const bool outside = fr < values[last];
      const Vector xc = outside ? Vector(centroid + 0.5 * (xr - centroid)) : Vector(centroid + 0.5 * (simplex[last] - centroid));
      const double fc = eval(xc);
      if (fc < std::min(fr, values[last])) {
        simplex[last] = xc;
        values[last] = fc;
      } else {
        for (std::size_t i = 1; i < simplex.size(); ++i) {
          simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0]);
          values[i] = eval(simplex[i]);
        }
      }
    }
    sort_simplex();
    res.trace.push_back(values.front());
  }
  res.x = simplex[0];
  res.value = values[0];
  return res;
}

}  // namespace elas::optim

#endif  // ELAS_CORE_OPTIM_HPP
