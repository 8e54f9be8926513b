#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "elas/analysis/cluster.hpp"
#include "elas/analysis/correlation.hpp"
#include "elas/analysis/hypothesis.hpp"
#include "elas/analysis/robustness.hpp"
#include "elas/core/random.hpp"

using namespace elas;
using namespace elas::analysis;

namespace {

std::vector<double> normals(std::size_t n, Rng& rng, double mu = 0.0) {
  std::normal_distribution<double> d(mu, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

// Exact two-sided signed-rank p-value by enumerating all sign patterns.
double wilcoxon_exact(const std::vector<double>& diffs) {
  std::vector<double> mag;
  for (double d : diffs) mag.push_back(std::abs(d));
  const auto r = stats::average_ranks(mag);
  double wp = 0;
  for (std::size_t i = 0; i < diffs.size(); ++i)
    if (diffs[i] > 0) wp += r[i];
  const double total = r.size() * (r.size() + 1) / 2.0;
  const double w = std::min(wp, total - wp);
  const std::size_t n = r.size();
  std::size_t hits = 0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) s += r[i];
    if (std::min(s, total - s) <= w + 1e-12) ++hits;
  }
  return std::min(1.0, static_cast<double>(hits) / static_cast<double>(std::size_t{1} << n));
}

// Brute-force Schweizer-Wolff for distinct values.
double sw_brute(const std::vector<double>& u, const std::vector<double>& v) {
  const std::size_t n = u.size();
  double sum = 0;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= n; ++j) {
      std::size_t c = 0;
      for (std::size_t k = 0; k < n; ++k) {
        std::size_t ru = 1, rv = 1;
        for (std::size_t l = 0; l < n; ++l) {
          ru += u[l] < u[k];
          rv += v[l] < v[k];
        }
        c += ru <= i && rv <= j;
      }
      sum += std::abs(double(c) / n - double(i) * j / (double(n) * n));
    }
  return 12.0 / (double(n) * n - 1) * sum;
}

Matrix block_similarity(const std::vector<int>& block, double within, double across) {
  const auto n = static_cast<Eigen::Index>(block.size());
  Matrix s(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) s(i, j) = i == j ? 1.0 : (block[i] == block[j] ? within : across);
  return s;
}

}  // namespace

// ---------------------------------------------------------------- robustness

TEST(Robustness, Examples) {
  std::vector<std::vector<double>> constant{{1, 1, 1}, {2, 2, 2}, {5, 5, 5}};
  EXPECT_EQ(robustness(constant), 1.0);
  Rng rng(1);
  std::vector<std::vector<double>> wide;
  for (int g = 0; g < 20; ++g) wide.push_back(normals(100, rng));
  EXPECT_LE(robustness(wide), 0.05);
  std::vector<std::vector<double>> half;
  for (int g = 0; g < 10; ++g) half.push_back(g < 5 ? std::vector<double>(100, double(g)) : normals(100, rng));
  EXPECT_DOUBLE_EQ(robustness(half), 0.5);
  EXPECT_THROW(robustness({}), Error);
  EXPECT_THROW(robustness({{}}), Error);
}

TEST(Robustness, AffineInvariantAndNanOutDropped) {
  Rng rng(2);
  std::vector<std::vector<double>> g, h;
  for (int i = 0; i < 30; ++i) {
    auto v = normals(100, rng);
    const double scale = i % 3 == 0 ? 1e-3 : 3.0;
    for (auto& x : v) x = 10.0 * i + scale * x;
    g.push_back(v);
    for (auto& x : v) x = -3.0 * x + 7.0;
    h.push_back(v);
  }
  EXPECT_NEAR(robustness(g), robustness(h), 1e-12);
  EXPECT_GT(robustness(g), 0.0);
  auto with_nan = g;
  with_nan[1][4] = std::numeric_limits<double>::quiet_NaN();  // a non-robust group disappears
  EXPECT_NEAR(robustness(with_nan), 10.0 / 29.0, 1e-12);
}

TEST(Robustness, LowPercentileFlag) {
  // interpolated P1 skips part of a single low outlier, the minimum does not
  std::vector<double> g(100, 0.0);
  g[0] = -1.0;
  std::vector<std::vector<double>> groups{g, std::vector<double>(100, 50.0)};
  const double interp = robustness(groups, {0.05, LowPercentile::Interpolated});
  const double minimum = robustness(groups, {0.05, LowPercentile::Minimum});
  EXPECT_GE(interp, minimum);
}

TEST(NNanOut, Examples) {
  std::vector<PointCountCase> never, always, step;
  for (std::size_t n = 5; n <= 30; ++n)
    for (int r = 0; r < 10; ++r) {
      never.push_back({n, false});
      always.push_back({n, true});
      step.push_back({n, n < 13});
    }
  EXPECT_EQ(estimate_n_nanout(never), 5u);
  EXPECT_FALSE(estimate_n_nanout(always).has_value());
  EXPECT_EQ(estimate_n_nanout(step), 13u);
  EXPECT_DOUBLE_EQ(nan_rate({1.0, std::nan(""), 2.0, std::nan("")}), 0.5);
}

// ---------------------------------------------------------------- SW correlation

TEST(SchweizerWolff, Examples) {
  Rng rng(3);
  const auto u = normals(200, rng);
  EXPECT_GE(sw_correlation(u, u), 0.95);
  std::vector<double> neg;
  for (double x : u) neg.push_back(-x);
  EXPECT_NEAR(sw_correlation(u, neg), sw_correlation(u, u), 1e-12);
  std::uniform_real_distribution<double> unif;
  std::vector<double> a(500), b(500);
  for (auto& x : a) x = unif(rng);
  for (auto& x : b) x = unif(rng);
  EXPECT_LE(sw_correlation(a, b), 0.15);
  EXPECT_TRUE(std::isnan(sw_correlation(std::vector<double>(10, 1.0), a = std::vector<double>(a.begin(), a.begin() + 10))));
}

TEST(SchweizerWolff, MatchesBruteForceAndRankInvariance) {
  Rng rng(4);
  for (int rep = 0; rep < 10; ++rep) {
    const auto u = normals(12, rng), v = normals(12, rng);
    EXPECT_NEAR(sw_correlation(u, v), sw_brute(u, v), 1e-12);
    std::vector<double> gu, hv;
    for (double x : u) gu.push_back(std::exp(x));
    for (double x : v) hv.push_back(x * x * x + 2 * x);
    EXPECT_EQ(sw_correlation(u, v), sw_correlation(gu, hv));
    EXPECT_NEAR(sw_correlation(u, v), sw_correlation(v, u), 1e-12);
  }
}

// ---------------------------------------------------------------- clustering

TEST(Hierarchical, Examples) {
  Rng rng(5);
  const auto x = normals(100, rng), z = normals(100, rng);
  const Matrix s = sw_matrix({x, x, z});
  const auto cut = hierarchical_cluster(s, 0.9);
  EXPECT_EQ(cut.k, 2);
  EXPECT_EQ(cut.labels[0], cut.labels[1]);
  EXPECT_NE(cut.labels[0], cut.labels[2]);
  EXPECT_EQ(hierarchical_cluster(block_similarity({0, 1, 2, 3}, 1.0, 0.5), 0.9).k, 4);
  // chain: s12 = s23 = 0.95, s13 = 0.86; average link after the first merge is 0.905
  Matrix chain(3, 3);
  chain << 1, 0.95, 0.86, 0.95, 1, 0.95, 0.86, 0.95, 1;
  EXPECT_EQ(hierarchical_cluster(chain, 0.9).k, 1);
  // single linkage would also merge, complete linkage would not
  chain(0, 2) = chain(2, 0) = 0.84;
  EXPECT_EQ(hierarchical_cluster(chain, 0.9).k, 2);
  EXPECT_EQ(hierarchical_cluster_count(block_similarity({0, 0, 1, 1, 2}, 0.97, 0.1), 0.9, 5, rng), 3);
}

TEST(KMedoids, Examples) {
  Rng rng(6);
  const Matrix s = block_similarity({0, 0, 0, 1, 1, 1}, 0.98, 0.05);
  const auto all = k_medoids(s, 6, rng);
  EXPECT_NEAR(all.objective, 0.0, 1e-12);
  const auto two = k_medoids(s, 2, rng);
  EXPECT_NE(two.medoids[0] / 3, two.medoids[1] / 3);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(two.labels[i], two.labels[i / 3 * 3]);
  EXPECT_THROW(k_medoids(s, 7, rng), Error);
}

TEST(KMedoids, BeatsRandomAndTraceMonotone) {
  Rng rng(7);
  std::vector<std::vector<double>> cols;
  for (int i = 0; i < 25; ++i) {
    auto v = normals(60, rng);
    if (i % 5) for (std::size_t j = 0; j < v.size(); ++j) v[j] += 2.0 * cols[i / 5 * 5][j];
    cols.push_back(v);
  }
  const Matrix s = sw_matrix(cols);
  const auto res = k_medoids(s, 5, rng, 3);
  for (std::size_t i = 1; i < res.trace.size(); ++i) EXPECT_LE(res.trace[i], res.trace[i - 1]);
  for (std::size_t m = 0; m < res.medoids.size(); ++m) EXPECT_EQ(res.labels[res.medoids[m]], int(m));
  const Matrix dist = (Matrix::Ones(25, 25) - s).cwiseMax(0.0);
  for (int r = 0; r < 100; ++r) {
    double obj = 0;
    const auto perm = random_permutation(25, rng);
    std::vector<std::size_t> med(perm.begin(), perm.begin() + 5);
    for (int i = 0; i < 25; ++i) obj += dist(i, Eigen::Index(med[rng() % 5]));
    EXPECT_LE(res.objective, obj + 1e-12);
  }
}

// ---------------------------------------------------------------- KS

TEST(KolmogorovSmirnov, Examples) {
  const std::vector<double> a{0.1, 0.4, 0.7, 0.9};
  auto r = ks_two_sample(a, a);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_EQ(r.p, 1.0);
  r = ks_two_sample(a, {2.1, 2.5, 2.9});
  EXPECT_EQ(r.statistic, 1.0);
  Rng rng(8);
  double mean_d = 0;
  for (int rep = 0; rep < 20; ++rep) mean_d += ks_two_sample(normals(100, rng), normals(100, rng, 1.0)).statistic / 20;
  EXPECT_NEAR(mean_d, 2 * stats::normal_cdf(0.5) - 1, 0.05);
}

TEST(KolmogorovSmirnov, DistributionValues) {
  // tabulated Kolmogorov upper tail
  EXPECT_NEAR(kolmogorov_upper(1.0), 0.26999967, 1e-7);
  EXPECT_NEAR(kolmogorov_upper(0.5), 0.96394524, 1e-7);
  EXPECT_NEAR(kolmogorov_upper(1.3580986), 0.05, 1e-6);
  EXPECT_NEAR(kolmogorov_upper(std::nextafter(1.0, 0.0)), kolmogorov_upper(1.0), 1e-12);
  EXPECT_NEAR(kolmogorov_upper(0.2), 1.0, 1e-12);
}

TEST(KolmogorovSmirnov, MonotoneInvariant) {
  Rng rng(9);
  const auto a = normals(40, rng), b = normals(55, rng, 0.3);
  std::vector<double> ea, eb;
  for (double x : a) ea.push_back(std::exp(x));
  for (double x : b) eb.push_back(std::exp(x));
  EXPECT_EQ(ks_two_sample(a, b).statistic, ks_two_sample(ea, eb).statistic);
}

// ---------------------------------------------------------------- Holm

TEST(Holm, Examples) {
  EXPECT_EQ(holm_correction({0.03}).adjusted[0], 0.03);
  const auto r = holm_correction({0.04, 0.01});
  EXPECT_DOUBLE_EQ(r.adjusted[1], 0.02);
  EXPECT_DOUBLE_EQ(r.adjusted[0], 0.04);
  EXPECT_TRUE(r.reject[0] && r.reject[1]);
}

TEST(Holm, MonotoneAndSupersetOfBonferroni) {
  Rng rng(10);
  std::uniform_real_distribution<double> u(0, 0.1);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> p(1 + rep % 12);
    for (auto& x : p) x = u(rng);
    const auto r = holm_correction(p);
    std::vector<std::size_t> idx(p.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return p[a] < p[b]; });
    for (std::size_t i = 1; i < idx.size(); ++i) EXPECT_LE(r.adjusted[idx[i - 1]], r.adjusted[idx[i]]);
    for (std::size_t i = 0; i < p.size(); ++i)
      if (p[i] * p.size() <= 0.05) { EXPECT_TRUE(r.reject[i]); }
  }
}

// ---------------------------------------------------------------- Friedman

TEST(Friedman, Examples) {
  const std::vector<std::vector<double>> same(10, std::vector<double>{1.0, 1.0, 1.0});
  auto r = friedman_test(same);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_EQ(r.p, 1.0);
  Rng rng(11);
  std::vector<std::vector<double>> best;
  std::uniform_real_distribution<double> u(1, 2);
  for (int b = 0; b < 20; ++b) best.push_back({0.0, u(rng), u(rng)});
  r = friedman_test(best);
  EXPECT_LT(r.p, 0.01);
  // df = 2: chi-square upper tail is exp(-x/2)
  EXPECT_NEAR(r.p, std::exp(-r.statistic / 2), 1e-12);
}

TEST(Friedman, TwoTreatmentsMatchDirectRanks) {
  Rng rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<std::vector<double>> blocks;
    int wins = 0;
    const int n = 8 + rep;
    for (int b = 0; b < n; ++b) {
      const auto v = normals(2, rng);
      wins += v[0] < v[1];
      blocks.push_back(v);
    }
    // R1 = (2n - wins)/n; statistic = 12n/6 * 2 (R1 - 1.5)^2 = (n - 2 wins)^2 / n
    const double stat = std::pow(n - 2.0 * wins, 2) / n;
    EXPECT_NEAR(friedman_test(blocks).statistic, stat, 1e-10);
    EXPECT_NEAR(friedman_test(blocks).p, std::erfc(std::sqrt(stat / 2)), 1e-10);
  }
}

// ---------------------------------------------------------------- Wilcoxon

TEST(Wilcoxon, Examples) {
  EXPECT_NEAR(wilcoxon_signed_rank({1, -1, 2, -2, 3, -3}).p, 1.0, 1e-12);
  std::vector<double> pos;
  for (int i = 1; i <= 20; ++i) pos.push_back(i * 0.1);
  EXPECT_LT(wilcoxon_signed_rank(pos).p, 0.001);
  EXPECT_EQ(wilcoxon_signed_rank(pos).statistic, 0.0);
  EXPECT_THROW(wilcoxon_signed_rank({0, 0, 0}), Error);
  EXPECT_THROW(wilcoxon_signed_rank({1, 2, 0, 3}), Error);
}

TEST(Wilcoxon, AgainstExactEnumeration) {
  // The continuity-corrected normal approximation is within 0.01 of the exact
  // law in the tails but drifts to about 0.017 near the centre at n = 10.
  Rng rng(13);
  for (int rep = 0; rep < 40; ++rep) {
    auto d = normals(10, rng, 0.4 * (rep % 4));
    const double exact = wilcoxon_exact(d), approx = wilcoxon_signed_rank(d).p;
    EXPECT_NEAR(approx, exact, 0.02) << rep;
    if (exact <= 0.2) { EXPECT_NEAR(approx, exact, 0.01) << rep; }
  }
}

// ---------------------------------------------------------------- pairwise wins

TEST(PairwiseWins, Examples) {
  using O = std::optional<double>;
  const std::vector<std::vector<O>> e{{O(1), O(2), O(3), std::nullopt},
                                      {O(2), O(3), O(4), O(0)},
                                      {O(0.5), O(5), O(1), O(1)},
                                      {std::nullopt, std::nullopt, std::nullopt, O(0.0)}};
  const auto w = pairwise_wins(e);
  EXPECT_EQ(w[0][0], 50.0);
  EXPECT_EQ(w[0][1], 100.0);
  EXPECT_EQ(w[1][0], 0.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) { EXPECT_DOUBLE_EQ(w[i][j] + w[j][i], 100.0); }
  EXPECT_NEAR(w[0][2], 100.0 / 3, 1e-12);
  EXPECT_TRUE(std::isnan(w[0][3]));
  EXPECT_EQ(w[1][3], 50.0);
}
