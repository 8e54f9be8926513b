#ifndef ELAS_MODELS_FOREST_HPP
#define ELAS_MODELS_FOREST_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "elas/core/random.hpp"
#include "elas/core/types.hpp"

namespace elas::models {

struct ForestSettings {
  int n_tree = 64;
  double row_fraction = 1.0;      // N_t as a multiple of N
  double feature_fraction = 1.0;  // n_D as a multiple of d
  int max_depth = 8;
  double gamma = 0.0;  // per-leaf penalty
  double alpha = 0.0;  // L2 penalty on leaf weights
  double shrinkage = 1.0;
  bool average = true;  // predict the mean of tree outputs instead of the sum
  std::uint64_t seed = 0;
  std::string label = "custom";
};

/// Named presets: split method x TSS x tuned error measure, from the
/// [n_tree, N_t, n_D] grid. Oblique split methods are not implemented; their
/// presets use axis-aligned splits with the same size parameters and say so
/// in the label.
inline ForestSettings forest_preset(const std::string& name) {
  struct Row {
    const char* name;
    int n_tree;
    double nt;
    double nd;
  };
  static const Row rows[] = {
      {"CART_full_MSE", 1024, 1.0, 0.75},    {"SCRT_full_MSE", 256, 0.25, 0.5},
      {"OC1_full_MSE", 128, 1.0, 1.0},       {"PAIR_full_MSE", 128, 1.0, 0.75},
      {"SUPP_full_MSE", 128, 1.0, 0.25},     {"CART_full_RDE", 64, 0.75, 1.0},
      {"SCRT_full_RDE", 256, 0.75, 1.0},     {"OC1_full_RDE", 128, 1.0, 1.0},
      {"PAIR_full_RDE", 1024, 0.75, 1.0},    {"SUPP_full_RDE", 64, 0.75, 1.0},
      {"CART_nearest_MSE", 256, 1.0, 0.75},  {"SCRT_nearest_MSE", 512, 0.5, 1.0},
      {"OC1_nearest_MSE", 128, 1.0, 1.0},    {"PAIR_nearest_MSE", 128, 1.0, 0.75},
      {"SUPP_nearest_MSE", 1024, 0.25, 1.0}, {"CART_nearest_RDE", 1024, 0.75, 1.0},
      {"SCRT_nearest_RDE", 256, 0.75, 1.0},  {"OC1_nearest_RDE", 128, 1.0, 1.0},
      {"PAIR_nearest_RDE", 1024, 0.75, 1.0}, {"SUPP_nearest_RDE", 64, 0.75, 1.0},
  };
  for (const auto& r : rows) {
    if (name == r.name) {
      ForestSettings s;
      s.n_tree = r.n_tree;
      s.row_fraction = r.nt;
      s.feature_fraction = r.nd;
      s.label = name.rfind("CART", 0) == 0 ? name : name + " (axis-aligned substitute)";
      return s;
    }
  }
  throw Error(ErrorCode::Config, "unknown forest preset '" + name + "'");
}

struct Split {
  Eigen::Index feature = 0;
  double threshold = 0.0;  // x[feature] <= threshold goes left
  double gain = 0.0;
};

/// Gradient statistics of the rows reaching a node.
struct NodeData {
  const Matrix& x;
  const std::vector<double>& g;
  const std::vector<double>& h;
  const std::vector<std::size_t>& rows;
  const std::vector<Eigen::Index>& features;
};

/// Strategy proposing the best split of a node, or nullopt.
class SplitStrategy {
 public:
  virtual ~SplitStrategy() = default;
  virtual std::optional<Split> find(const NodeData& node, double gamma, double alpha) const = 0;
};

inline double split_score(double sum_g, double sum_h, double alpha) {
  const double denom = sum_h + alpha;
  return denom > 0.0 ? sum_g * sum_g / denom : 0.0;
}

/// Exact greedy axis-aligned splits maximising
/// 1/2 [r(L) + r(R) - r(L+R)] - gamma with r(S) = (sum g)^2 / (sum h + alpha).
class AxisAlignedSplit final : public SplitStrategy {
 public:
  std::optional<Split> find(const NodeData& node, double gamma, double alpha) const override {
    double g_all = 0.0, h_all = 0.0;
    for (auto r : node.rows) {
      g_all += node.g[r];
      h_all += node.h[r];
    }
    const double parent = split_score(g_all, h_all, alpha);
    std::optional<Split> best;
    std::vector<std::size_t> sorted(node.rows);
    for (auto f : node.features) {
      std::stable_sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) { return node.x(static_cast<Eigen::Index>(a), f) < node.x(static_cast<Eigen::Index>(b), f); });
      double g_left = 0.0, h_left = 0.0;
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        g_left += node.g[sorted[i]];
        h_left += node.h[sorted[i]];
        const double v = node.x(static_cast<Eigen::Index>(sorted[i]), f);
        const double v_next = node.x(static_cast<Eigen::Index>(sorted[i + 1]), f);
        if (v == v_next) continue;
        const double gain = 0.5 * (split_score(g_left, h_left, alpha) + split_score(g_all - g_left, h_all - h_left, alpha) - parent) - gamma;
        if (gain > 0.0 && (!best || gain > best->gain)) best = Split{f, 0.5 * (v + v_next), gain};
      }
    }
    return best;
  }
};

class RegressionTree {
 public:
  struct Node {
    bool leaf = true;
    Eigen::Index feature = 0;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double weight = 0.0;
    int depth = 0;
  };

  double predict(const Point& x) const {
    int i = 0;
    while (!nodes_[static_cast<std::size_t>(i)].leaf) {
      const auto& n = nodes_[static_cast<std::size_t>(i)];
      i = x(n.feature) <= n.threshold ? n.left : n.right;
    }
    return nodes_[static_cast<std::size_t>(i)].weight;
  }

  int depth() const {
    int d = 0;
    for (const auto& n : nodes_) d = std::max(d, n.depth);
    return d;
  }

  std::size_t leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.leaf; }));
  }

  const std::vector<Node>& nodes() const noexcept { return nodes_; }

  static RegressionTree from_nodes(std::vector<Node> nodes) {
    RegressionTree t;
    t.nodes_ = std::move(nodes);
    return t;
  }

  /// Grows a tree on the given rows/features; leaf weight -sum g / (sum h + alpha).
  static RegressionTree grow(const Matrix& x, const std::vector<double>& g, const std::vector<double>& h,
                             const std::vector<std::size_t>& rows, const std::vector<Eigen::Index>& features,
                             const ForestSettings& s, const SplitStrategy& strategy) {
    RegressionTree t;
    t.build(x, g, h, rows, features, s, strategy, 0);
    return t;
  }

 private:
  int build(const Matrix& x, const std::vector<double>& g, const std::vector<double>& h,
            const std::vector<std::size_t>& rows, const std::vector<Eigen::Index>& features, const ForestSettings& s,
            const SplitStrategy& strategy, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{});
    nodes_.back().depth = depth;
    double sg = 0.0, sh = 0.0;
    for (auto r : rows) {
      sg += g[r];
      sh += h[r];
    }
    const double denom = sh + s.alpha;
    nodes_[static_cast<std::size_t>(id)].weight = denom > 0.0 ? -s.shrinkage * sg / denom : 0.0;
    if (depth >= s.max_depth || rows.size() < 2) return id;
    const auto split = strategy.find(NodeData{x, g, h, rows, features}, s.gamma, s.alpha);
    if (!split) return id;
    std::vector<std::size_t> left, right;
    for (auto r : rows) (x(static_cast<Eigen::Index>(r), split->feature) <= split->threshold ? left : right).push_back(r);
    if (left.empty() || right.empty()) return id;
    const int l = build(x, g, h, left, features, s, strategy, depth + 1);
    const int rr = build(x, g, h, right, features, s, strategy, depth + 1);
    auto& node = nodes_[static_cast<std::size_t>(id)];
    node.leaf = false;
    node.feature = split->feature;
    node.threshold = split->threshold;
    node.left = l;
    node.right = rr;
    return id;
  }

  std::vector<Node> nodes_;
};

class ForestModel {
 public:
  const std::vector<RegressionTree>& trees() const noexcept { return trees_; }
  const ForestSettings& settings() const noexcept { return settings_; }
  /// Training MSE of the boosted sum after each tree.
  const std::vector<double>& training_mse() const noexcept { return training_mse_; }

  double predict(const Point& x) const {
    if (trees_.empty()) return 0.0;
    double s = 0.0;
    for (const auto& t : trees_) s += t.predict(x);
    return settings_.average ? s / static_cast<double>(trees_.size()) : s;
  }

  static ForestModel from_trees(std::vector<RegressionTree> trees, ForestSettings s) {
    ForestModel m;
    m.trees_ = std::move(trees);
    m.settings_ = std::move(s);
    return m;
  }

 private:
  friend ForestModel forest_train(const SampleSet&, const ForestSettings&, const SplitStrategy&);
  std::vector<RegressionTree> trees_;
  ForestSettings settings_;
  std::vector<double> training_mse_;
};

/// Gradient boosting with squared loss l = (y - yhat)^2, g = 2 (yhat - y), h = 2.
/// Each tree sees a subsample of ceil(N_t N) rows (without replacement) and
/// ceil(n_D d) features.
inline ForestModel forest_train(const SampleSet& t, const ForestSettings& s, const SplitStrategy& strategy) {
  const SampleSet data = t.known();
  require(!data.empty(), ErrorCode::EmptyInput, "forest needs training data");
  const Matrix x = data.as_matrix();
  const auto ys = data.known_outputs();
  const std::size_t n = ys.size();
  const auto d = x.cols();
  const auto n_rows = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(s.row_fraction * static_cast<double>(n))), 1, n);
  const auto n_feat = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::ceil(s.feature_fraction * static_cast<double>(d))), 1, d);

  ForestModel model;
  model.settings_ = s;
  Rng rng(s.seed);
  std::vector<double> pred(n, 0.0), g(n), h(n, 2.0);
  for (int k = 0; k < s.n_tree; ++k) {
    for (std::size_t i = 0; i < n; ++i) g[i] = 2.0 * (pred[i] - ys[i]);
    auto perm = random_permutation(n, rng);
    std::vector<std::size_t> rows(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_rows));
    std::sort(rows.begin(), rows.end());
    auto fperm = random_permutation(static_cast<std::size_t>(d), rng);
    std::vector<Eigen::Index> feats;
    for (Eigen::Index j = 0; j < n_feat; ++j) feats.push_back(static_cast<Eigen::Index>(fperm[static_cast<std::size_t>(j)]));
    std::sort(feats.begin(), feats.end());
    auto tree = RegressionTree::grow(x, g, h, rows, feats, s, strategy);
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] += tree.predict(x.row(static_cast<Eigen::Index>(i)).transpose());
      sse += (pred[i] - ys[i]) * (pred[i] - ys[i]);
    }
    model.training_mse_.push_back(sse / static_cast<double>(n));
    model.trees_.push_back(std::move(tree));
  }
  return model;
}

inline ForestModel forest_train(const SampleSet& t, const ForestSettings& s) {
  return forest_train(t, s, AxisAlignedSplit{});
}

}  // namespace elas::models

#endif  // ELAS_MODELS_FOREST_HPP
