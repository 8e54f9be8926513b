#ifndef ELAS_MODELS_METRICS_HPP
#define ELAS_MODELS_METRICS_HPP

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "elas/core/error.hpp"

namespace elas::models {

inline double mse(std::span<const double> y, std::span<const double> y_hat) {
  require(y.size() == y_hat.size(), ErrorCode::DimensionMismatch, "mse: length mismatch");
  require(!y.empty(), ErrorCode::EmptyInput, "mse: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
  return s / static_cast<double>(y.size());
}

/// Strict ranks 1..n: ascending value, ties resolved by lower index.
inline std::vector<int> strict_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<int> r(v.size());
  for (std::size_t k = 0; k < idx.size(); ++k) r[idx[k]] = static_cast<int>(k + 1);
  return r;
}

/// max over permutations pi of sum_{i<=mu} |i - pi^{-1}(i)|. The optimum
/// sends positions 1..k onto the top values in reverse and positions
/// k+1..mu onto the bottom values in reverse; maximise over k.
inline long rde_denominator(int lambda, int mu) {
  require(mu >= 1 && mu <= lambda, ErrorCode::InvalidArgument, "rde: need 1 <= mu <= lambda");
  long best = 0;
  for (int k = 0; k <= mu; ++k) {
    long s = 0;
    for (int i = 1; i <= k; ++i) s += std::labs(static_cast<long>(lambda + 1 - i) - i);
    for (int j = 0; j < mu - k; ++j) s += std::labs(static_cast<long>(mu - j) - (j + 1));
    best = std::max(best, s);
  }
  return best;
}

/// Ranking difference error of the predicted values `y_hat` against the
/// true values `y`, over the mu points the model ranks best.
inline double rde(std::span<const double> y, std::span<const double> y_hat, int mu) {
  require(y.size() == y_hat.size(), ErrorCode::DimensionMismatch, "rde: length mismatch");
  const int lambda = static_cast<int>(y.size());
  const long denom = rde_denominator(lambda, mu);
  const auto r_true = strict_ranks(y);
  const auto r_model = strict_ranks(y_hat);
  long num = 0;
  for (int i = 0; i < lambda; ++i)
    if (r_model[static_cast<std::size_t>(i)] <= mu)
      num += std::labs(static_cast<long>(r_model[static_cast<std::size_t>(i)]) - r_true[static_cast<std::size_t>(i)]);
  return denom == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(denom);
}

/// Errors of one (model, generation) cell; both empty when not trained.
struct ErrorPair {
  std::optional<double> mse;
  std::optional<double> rde;
  bool not_trained = false;
  std::string reason;
};

}  // namespace elas::models

#endif  // ELAS_MODELS_METRICS_HPP
