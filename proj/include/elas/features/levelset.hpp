#ifndef ELAS_FEATURES_LEVELSET_HPP
#define ELAS_FEATURES_LEVELSET_HPP

#include <algorithm>
#include <array>
#include <numeric>
#include <cmath>

#include "elas/core/random.hpp"
#include "elas/core/stats.hpp"
#include "elas/features/common.hpp"

namespace elas::features {

enum class Discriminant { Lda, Qda };

namespace detail {

struct GaussianClass {
  Vector mean;
  Matrix cov;
  double log_prior = 0.0;
};

/// Adds 1e-8 trace(S)/d to the diagonal (1e-8 when S vanishes).
inline Matrix regularize(Matrix s) {
  const double d = static_cast<double>(s.rows());
  const double tr = s.trace();
  s.diagonal().array() += tr > 0.0 ? 1e-8 * tr / d : 1e-8;
  return s;
}

/// Maximum-likelihood discriminant on rows `train`; labels are 0/1.
class DiscriminantModel {
 public:
  DiscriminantModel(const Matrix& x, const std::vector<int>& label, const std::vector<std::size_t>& train,
                    Discriminant kind) {
    const auto d = x.cols();
    std::array<std::vector<std::size_t>, 2> rows;
    for (auto r : train) rows[static_cast<std::size_t>(label[r])].push_back(r);
    Matrix pooled = Matrix::Zero(d, d);
    for (int c = 0; c < 2; ++c) {
      const auto& rc = rows[static_cast<std::size_t>(c)];
      auto& cls = classes_[static_cast<std::size_t>(c)];
      cls.mean = Vector::Zero(d);
      for (auto r : rc) cls.mean += x.row(static_cast<Eigen::Index>(r)).transpose();
      cls.mean /= static_cast<double>(rc.size());
      Matrix scatter = Matrix::Zero(d, d);
      for (auto r : rc) {
        const Vector v = x.row(static_cast<Eigen::Index>(r)).transpose() - cls.mean;
        scatter += v * v.transpose();
      }
      pooled += scatter;
      cls.cov = scatter / static_cast<double>(std::max<std::size_t>(rc.size() - 1, 1));
      cls.log_prior = std::log(static_cast<double>(rc.size()) / static_cast<double>(train.size()));
    }
    const double dof = static_cast<double>(std::max<std::size_t>(train.size() - 2, 1));
    for (int c = 0; c < 2; ++c) {
      auto& cls = classes_[static_cast<std::size_t>(c)];
      const Matrix cov = regularize(kind == Discriminant::Lda ? Matrix(pooled / dof) : cls.cov);
      solvers_[static_cast<std::size_t>(c)].compute(cov);
      log_det_[static_cast<std::size_t>(c)] = solvers_[static_cast<std::size_t>(c)].vectorD().array().abs().log().sum();
    }
  }

  int classify(const Vector& x) const {
    double best = -kInf;
    int arg = 0;
    for (int c = 0; c < 2; ++c) {
      const auto i = static_cast<std::size_t>(c);
      const Vector v = x - classes_[i].mean;
      const double score = classes_[i].log_prior - 0.5 * log_det_[i] - 0.5 * v.dot(solvers_[i].solve(v));
      if (score > best) {
        best = score;
        arg = c;
      }
    }
    return arg;
  }

 private:
  std::array<GaussianClass, 2> classes_;
  std::array<Eigen::LDLT<Matrix>, 2> solvers_;
  std::array<double, 2> log_det_{};
};

/// Stratified fold assignment: each class is shuffled and dealt round-robin.
inline std::vector<int> stratified_folds(const std::vector<int>& label, int folds, Rng& rng) {
  std::vector<int> fold(label.size(), 0);
  int next = 0;
  for (int c = 0; c < 2; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < label.size(); ++i)
      if (label[i] == c) members.push_back(i);
    const auto perm = random_permutation(members.size(), rng);
    for (auto p : perm) {
      fold[members[p]] = next;
      next = (next + 1) % folds;
    }
  }
  return fold;
}

}  // namespace detail

/// Cross-validated misclassification rate of predicting [y < Q_q(y)];
/// NAN_OUT if a class is empty or a training fold misses a class.
inline double levelset_mmce(const Matrix& x, const std::vector<double>& y, double q, Discriminant kind, int folds,
                            std::uint64_t seed) {
  const auto n = y.size();
  if (n < 3) return kNanOut;
  const double thr = stats::quantile(y, q);
  std::vector<int> label(n);
  int below = 0;
  for (std::size_t i = 0; i < n; ++i) below += (label[i] = y[i] < thr ? 1 : 0);
  if (below == 0 || below == static_cast<int>(n)) return kNanOut;

  Rng rng(seed);
  const int k = n < static_cast<std::size_t>(folds) ? static_cast<int>(n) : folds;
  const auto fold = k == static_cast<int>(n) ? [&] {
    std::vector<int> f(n);
    std::iota(f.begin(), f.end(), 0);
    return f;
  }()
                                             : detail::stratified_folds(label, k, rng);
  double total = 0.0;
  int used = 0;
  for (int f = 0; f < k; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < n; ++i) (fold[i] == f ? test : train).push_back(i);
    if (test.empty()) continue;
    int c1 = 0;
    for (auto r : train) c1 += label[r];
    if (c1 == 0 || c1 == static_cast<int>(train.size())) return kNanOut;
    const detail::DiscriminantModel model(x, label, train, kind);
    int wrong = 0;
    for (auto r : test) wrong += model.classify(x.row(static_cast<Eigen::Index>(r)).transpose()) != label[r];
    total += static_cast<double>(wrong) / static_cast<double>(test.size());
    ++used;
  }
  return used ? total / used : kNanOut;
}

/// mmce_{lda,qda}_<q> and lda_qda_<q> on the points with known outputs.
inline FeatureList levelset_features(const SampleSet& s, const FeatureConfig& cfg, std::uint64_t seed) {
  const SampleSet known = s.known();
  const auto y = known.known_outputs();
  const Matrix x = known.empty() ? Matrix() : known.as_matrix();
  FeatureList out;
  for (double q : cfg.levelset_quantiles) {
    const auto tag = quantile_tag(q);
    const double lda = known.empty() ? kNanOut : levelset_mmce(x, y, q, Discriminant::Lda, cfg.levelset_folds, seed);
    const double qda = known.empty() ? kNanOut : levelset_mmce(x, y, q, Discriminant::Qda, cfg.levelset_folds, seed);
    out.push_back({"level.mmce_lda_" + tag, lda});
    out.push_back({"level.mmce_qda_" + tag, qda});
    out.push_back({"level.lda_qda_" + tag, safe_ratio(lda, qda)});
  }
  return out;
}

}  // namespace elas::features

#endif  // ELAS_FEATURES_LEVELSET_HPP
