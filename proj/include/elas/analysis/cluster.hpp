#ifndef ELAS_ANALYSIS_CLUSTER_HPP
#define ELAS_ANALYSIS_CLUSTER_HPP

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "elas/core/error.hpp"
#include "elas/core/random.hpp"
#include "elas/core/types.hpp"

namespace elas::analysis {

struct HierarchicalCut {
  int k = 0;
  std::vector<int> labels;  // cluster id per item, ids 0..k-1 in order of first appearance
};

/// Average-linkage agglomeration on similarity s; clusters keep merging while
/// the average similarity between the closest pair stays >= threshold.
/// `order` permutes the items first (ties are broken by position).
inline HierarchicalCut hierarchical_cluster(const Matrix& s, double threshold = 0.9,
                                            const std::vector<std::size_t>& order = {}) {
  const auto n = static_cast<std::size_t>(s.rows());
  require(s.rows() == s.cols(), ErrorCode::DimensionMismatch, "similarity matrix must be square");
  std::vector<std::size_t> perm = order;
  if (perm.empty()) {
    perm.resize(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
  }
  require(perm.size() == n, ErrorCode::DimensionMismatch, "order length differs from matrix size");

  std::vector<std::vector<std::size_t>> clusters;
  for (auto p : perm) clusters.push_back({p});
  // pairwise average similarity between clusters (kept as sum / count)
  auto link = [&](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    double sum = 0.0;
    for (auto i : a)
      for (auto j : b) sum += s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return sum / static_cast<double>(a.size() * b.size());
  };
  while (clusters.size() > 1) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < clusters.size(); ++i)
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        const double l = link(clusters[i], clusters[j]);
        if (l > best) {
          best = l;
          bi = i;
          bj = j;
        }
      }
    if (best < threshold) break;
    clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(), clusters[bj].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
  }
  HierarchicalCut cut;
  cut.k = static_cast<int>(clusters.size());
  cut.labels.assign(n, -1);
  std::sort(clusters.begin(), clusters.end(), [](const auto& a, const auto& b) {
    return *std::min_element(a.begin(), a.end()) < *std::min_element(b.begin(), b.end());
  });
  for (std::size_t c = 0; c < clusters.size(); ++c)
    for (auto i : clusters[c]) cut.labels[i] = static_cast<int>(c);
  return cut;
}

/// Mean cluster count over `runs` random item orders (rounded).
inline int hierarchical_cluster_count(const Matrix& s, double threshold, int runs, Rng& rng) {
  double total = 0.0;
  for (int r = 0; r < runs; ++r) {
    const auto order = r == 0 ? std::vector<std::size_t>{} : random_permutation(static_cast<std::size_t>(s.rows()), rng);
    total += hierarchical_cluster(s, threshold, order).k;
  }
  return static_cast<int>(std::lround(total / runs));
}

struct ClusterResult {
  int k = 0;
  std::vector<int> labels;             // medoid slot per item
  std::vector<std::size_t> medoids;    // item indices
  double objective = 0.0;              // sum of distances to the assigned medoid
  std::vector<double> trace;           // objective after each accepted swap (best restart)
};

namespace detail {
inline double assign(const Matrix& dist, const std::vector<std::size_t>& medoids, std::vector<int>* labels) {
  const auto n = static_cast<std::size_t>(dist.rows());
  double total = 0.0;
  if (labels) labels->assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < medoids.size(); ++m) {
      const double d = dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(medoids[m]));
      if (d < best) {
        best = d;
        if (labels) (*labels)[i] = static_cast<int>(m);
      }
    }
    total += best;
  }
  return total;
}
}  // namespace detail

/// PAM on distance 1 - s: seeded random starts, then best-improvement swaps
/// until no swap lowers the objective. Best of `restarts` runs.
inline ClusterResult k_medoids(const Matrix& s, int k, Rng& rng, int restarts = 5) {
  const auto n = static_cast<std::size_t>(s.rows());
  require(k >= 1 && static_cast<std::size_t>(k) <= n, ErrorCode::InvalidArgument, "k_medoids needs 1 <= k <= n");
  const Matrix dist = (Matrix::Ones(s.rows(), s.cols()) - s).cwiseMax(0.0);
  ClusterResult best;
  best.objective = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(restarts, 1); ++r) {
    auto perm = random_permutation(n, rng);
    std::vector<std::size_t> med(perm.begin(), perm.begin() + k);
    double obj = detail::assign(dist, med, nullptr);
    std::vector<double> trace{obj};
    for (;;) {
      double best_obj = obj;
      std::size_t bm = 0, bo = 0;
      bool found = false;
      for (std::size_t m = 0; m < med.size(); ++m)
        for (std::size_t o = 0; o < n; ++o) {
          if (std::find(med.begin(), med.end(), o) != med.end()) continue;
          auto cand = med;
          cand[m] = o;
          const double v = detail::assign(dist, cand, nullptr);
          if (v < best_obj - 1e-12) {
            best_obj = v;
            bm = m;
            bo = o;
            found = true;
          }
        }
      if (!found) break;
      med[bm] = bo;
      obj = best_obj;
      trace.push_back(obj);
    }
    if (obj < best.objective) {
      best.k = k;
      best.medoids = med;
      best.objective = obj;
      best.trace = trace;
    }
  }
  detail::assign(dist, best.medoids, &best.labels);
  // each medoid must sit in its own cluster even when distances tie
  for (std::size_t m = 0; m < best.medoids.size(); ++m) best.labels[best.medoids[m]] = static_cast<int>(m);
  return best;
}

}  // namespace elas::analysis

#endif  // ELAS_ANALYSIS_CLUSTER_HPP
