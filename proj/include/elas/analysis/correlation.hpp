#ifndef ELAS_ANALYSIS_CORRELATION_HPP
#define ELAS_ANALYSIS_CORRELATION_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "elas/core/error.hpp"
#include "elas/core/stats.hpp"
#include "elas/core/types.hpp"

namespace elas::analysis {

/// Schweizer-Wolff sigma from the empirical copula:
/// 12/(n^2-1) sum_{i,j} |C_n(i/n, j/n) - ij/n^2|. NaN for a constant input.
inline double sw_correlation(const std::vector<double>& u, const std::vector<double>& v) {
  require(u.size() == v.size(), ErrorCode::DimensionMismatch, "sw_correlation: length mismatch");
  const std::size_t n = u.size();
  require(n >= 2, ErrorCode::InvalidArgument, "sw_correlation needs at least two pairs");
  const auto constant = [](const std::vector<double>& x) {
    return std::all_of(x.begin(), x.end(), [&](double a) { return a == x.front(); });
  };
  if (constant(u) || constant(v)) return std::numeric_limits<double>::quiet_NaN();

  // rank (1..n, ties averaged) -> grid cell ceil(rank)
  const auto ru = stats::average_ranks(u), rv = stats::average_ranks(v);
  std::vector<std::vector<double>> cum(n + 1, std::vector<double>(n + 1, 0.0));
  for (std::size_t k = 0; k < n; ++k)
    cum[static_cast<std::size_t>(std::ceil(ru[k]))][static_cast<std::size_t>(std::ceil(rv[k]))] += 1.0;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= n; ++j) cum[i][j] += cum[i - 1][j] + cum[i][j - 1] - cum[i - 1][j - 1];

  const double nn = static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= n; ++j)
      sum += std::abs(cum[i][j] / nn - static_cast<double>(i) * static_cast<double>(j) / (nn * nn));
  return 12.0 / (nn * nn - 1.0) * sum;
}

/// Symmetric matrix of sw_correlation over the columns; unit diagonal.
/// Each pair uses the rows where both entries are non-NaN. Pairs with fewer
/// than two such rows or an undefined correlation get similarity 0.
inline Matrix sw_matrix(const std::vector<std::vector<double>>& columns) {
  const auto m = static_cast<Eigen::Index>(columns.size());
  Matrix s = Matrix::Identity(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const auto& a = columns[static_cast<std::size_t>(i)];
      const auto& b = columns[static_cast<std::size_t>(j)];
      require(a.size() == b.size(), ErrorCode::DimensionMismatch, "sw_matrix: columns differ in length");
      std::vector<double> u, v;
      for (std::size_t r = 0; r < a.size(); ++r)
        if (!std::isnan(a[r]) && !std::isnan(b[r])) {
          u.push_back(a[r]);
          v.push_back(b[r]);
        }
      const double c = u.size() < 2 ? 0.0 : sw_correlation(u, v);
      s(i, j) = s(j, i) = std::isnan(c) ? 0.0 : c;
    }
  return s;
}

}  // namespace elas::analysis

#endif  // ELAS_ANALYSIS_CORRELATION_HPP
