#ifndef ELAS_ANALYSIS_HYPOTHESIS_HPP
#define ELAS_ANALYSIS_HYPOTHESIS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "elas/core/error.hpp"
#include "elas/core/stats.hpp"

namespace elas::analysis {

struct TestResult {
  double statistic = 0.0;
  double p = 1.0;
};

/// Upper tail of the Kolmogorov distribution, 100 series terms. The
/// alternating series is used for large lambda, the theta form for small.
inline double kolmogorov_upper(double lambda) {
  if (lambda <= 0.0) return 1.0;
  constexpr int terms = 100;
  double p = 0.0;
  if (lambda < 1.0) {
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double cdf = 0.0;
    for (int k = 1; k <= terms; ++k) {
      const double t = 2.0 * k - 1.0;
      cdf += std::exp(-t * t * pi2 / (8.0 * lambda * lambda));
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
    p = 1.0 - cdf;
  } else {
    for (int k = 1; k <= terms; ++k) p += (k % 2 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * lambda * lambda);
  }
  return std::clamp(p, 0.0, 1.0);
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value at
/// effective size |a||b|/(|a|+|b|).
inline TestResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), ErrorCode::EmptyInput, "ks_two_sample needs two nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  return {d, d == 0.0 ? 1.0 : kolmogorov_upper(std::sqrt(ne) * d)};
}

struct HolmResult {
  std::vector<double> adjusted;  // in input order
  std::vector<bool> reject;
};

/// Holm step-down adjustment.
inline HolmResult holm_correction(const std::vector<double>& p, double alpha = 0.05) {
  const std::size_t m = p.size();
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](auto x, auto y) { return p[x] < p[y]; });
  HolmResult r{std::vector<double>(m), std::vector<bool>(m, false)};
  double running = 0.0;
  for (std::size_t rank = 0; rank < m; ++rank) {
    const auto i = idx[rank];
    running = std::max(running, std::min(1.0, static_cast<double>(m - rank) * p[i]));
    r.adjusted[i] = running;
    r.reject[i] = running <= alpha;
  }
  return r;
}

/// Friedman rank test over blocks (rows) x treatments (columns).
inline TestResult friedman_test(const std::vector<std::vector<double>>& blocks) {
  const std::size_t n = blocks.size();
  require(n >= 2, ErrorCode::InvalidArgument, "friedman_test needs at least two blocks");
  const std::size_t k = blocks.front().size();
  require(k >= 2, ErrorCode::InvalidArgument, "friedman_test needs at least two treatments");
  std::vector<double> mean_rank(k, 0.0);
  for (const auto& b : blocks) {
    require(b.size() == k, ErrorCode::DimensionMismatch, "friedman_test: ragged block");
    const auto r = stats::average_ranks(b);
    for (std::size_t j = 0; j < k; ++j) mean_rank[j] += r[j];
  }
  for (auto& r : mean_rank) r /= static_cast<double>(n);
  const double kk = static_cast<double>(k);
  double ss = 0.0;
  for (double r : mean_rank) ss += (r - (kk + 1.0) / 2.0) * (r - (kk + 1.0) / 2.0);
  const double stat = 12.0 * static_cast<double>(n) / (kk * (kk + 1.0)) * ss;
  const double p = stat <= 0.0 ? 1.0 : boost::math::gamma_q((kk - 1.0) / 2.0, stat / 2.0);
  return {stat, p};
}

/// Two-sided Wilcoxon signed-rank test on paired differences: zeros dropped,
/// W = min(W+, W-), normal approximation with tie-corrected variance and
/// continuity correction.
inline TestResult wilcoxon_signed_rank(const std::vector<double>& diffs) {
  std::vector<double> nz;
  for (double d : diffs)
    if (d != 0.0) nz.push_back(d);
  require(!nz.empty(), ErrorCode::Undefined, "wilcoxon: all differences are zero");
  require(nz.size() >= 5, ErrorCode::InvalidArgument, "wilcoxon needs at least 5 nonzero differences");
  std::vector<double> mag;
  for (double d : nz) mag.push_back(std::abs(d));
  const auto r = stats::average_ranks(mag);
  double wp = 0.0, wm = 0.0;
  for (std::size_t i = 0; i < nz.size(); ++i) (nz[i] > 0 ? wp : wm) += r[i];
  const double n = static_cast<double>(nz.size());
  double tie = 0.0;
  for (auto t : stats::tie_sizes(mag)) {
    const double tt = static_cast<double>(t);
    tie += tt * tt * tt - tt;
  }
  const double w = std::min(wp, wm);
  const double mu = n * (n + 1.0) / 4.0;
  const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie / 48.0;
  const double dev = std::max(std::abs(w - mu) - 0.5, 0.0);
  const double p = var > 0.0 ? std::min(1.0, 2.0 * (1.0 - stats::normal_cdf(dev / std::sqrt(var)))) : 1.0;
  return {w, p};
}

/// Win percentages: entry (i, j) = 100 * (wins of i over j + ties / 2) over
/// the cases where both have an error. NaN where no case is shared.
inline std::vector<std::vector<double>> pairwise_wins(const std::vector<std::vector<std::optional<double>>>& errors) {
  const std::size_t m = errors.size();
  std::vector<std::vector<double>> out(m, std::vector<double>(m, std::numeric_limits<double>::quiet_NaN()));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      require(errors[i].size() == errors[j].size(), ErrorCode::DimensionMismatch, "pairwise_wins: unaligned cases");
      double score = 0.0;
      std::size_t valid = 0;
      for (std::size_t c = 0; c < errors[i].size(); ++c) {
        const auto& a = errors[i][c];
        const auto& b = errors[j][c];
        if (!a || !b || std::isnan(*a) || std::isnan(*b)) continue;
        ++valid;
        score += *a < *b ? 1.0 : (*a == *b ? 0.5 : 0.0);
      }
      if (valid) out[i][j] = 100.0 * score / static_cast<double>(valid);
    }
  return out;
}

}  // namespace elas::analysis

#endif  // ELAS_ANALYSIS_HYPOTHESIS_HPP
