#ifndef ELAS_MODELS_POLYNOMIAL_HPP
#define ELAS_MODELS_POLYNOMIAL_HPP

#include <string>
#include <vector>

#include "elas/core/transform.hpp"
#include "elas/core/types.hpp"
#include "elas/models/fit_result.hpp"

namespace elas::models {

enum class PolyKind { Linear, PureQuadratic, FullQuadratic };

inline std::string to_string(PolyKind k) {
  switch (k) {
    case PolyKind::Linear: return "linear";
    case PolyKind::PureQuadratic: return "pure_quadratic";
    case PolyKind::FullQuadratic: return "full_quadratic";
  }
  return "?";
}

/// Number of free coefficients (intercept included).
inline std::size_t coefficient_count(PolyKind k, Eigen::Index d) {
  const auto n = static_cast<std::size_t>(d);
  switch (k) {
    case PolyKind::Linear: return n + 1;
    case PolyKind::PureQuadratic: return 2 * n + 1;
    case PolyKind::FullQuadratic: return (n + 1) * (n + 2) / 2;
  }
  return 0;
}

/// f(x) = z^T A z + b^T z + c with z = basis (x - center).
struct PolyModel {
  PolyKind kind = PolyKind::Linear;
  Vector center;
  Matrix basis;
  Matrix A;
  Vector b;
  double c = 0.0;

  double predict(const Point& x) const {
    const Vector z = basis * (x - center);
    return z.dot(A * z) + b.dot(z) + c;
  }
};

namespace detail {

inline Vector poly_row(PolyKind kind, const Vector& z) {
  const auto d = z.size();
  Vector row(static_cast<Eigen::Index>(coefficient_count(kind, d)));
  Eigen::Index k = 0;
  row(k++) = 1.0;
  for (Eigen::Index i = 0; i < d; ++i) row(k++) = z(i);
  if (kind == PolyKind::Linear) return row;
  for (Eigen::Index i = 0; i < d; ++i) row(k++) = z(i) * z(i);
  if (kind == PolyKind::PureQuadratic) return row;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i + 1; j < d; ++j) row(k++) = z(i) * z(j);
  return row;
}

inline PolyKind lower(PolyKind k) { return k == PolyKind::FullQuadratic ? PolyKind::PureQuadratic : PolyKind::Linear; }

/// Least squares for exactly one kind; nullopt when the design is rank deficient.
inline std::optional<PolyModel> fit_exact_kind(const SampleSet& known, PolyKind kind, const Vector& center,
                                               const Matrix& basis) {
  const auto d = basis.rows();
  const auto p = coefficient_count(kind, d);
  if (known.size() < p) return std::nullopt;
  Matrix X(static_cast<Eigen::Index>(known.size()), static_cast<Eigen::Index>(p));
  Vector y(static_cast<Eigen::Index>(known.size()));
  for (std::size_t i = 0; i < known.size(); ++i) {
    X.row(static_cast<Eigen::Index>(i)) = poly_row(kind, basis * (known.points[i] - center)).transpose();
    y(static_cast<Eigen::Index>(i)) = *known.outputs[i];
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < static_cast<Eigen::Index>(p)) return std::nullopt;
  const Vector beta = qr.solve(y);
  if (!beta.allFinite()) return std::nullopt;

  PolyModel m;
  m.kind = kind;
  m.center = center;
  m.basis = basis;
  m.A = Matrix::Zero(d, d);
  m.b = beta.segment(1, d);
  m.c = beta(0);
  Eigen::Index k = 1 + d;
  if (kind != PolyKind::Linear) {
    for (Eigen::Index i = 0; i < d; ++i) m.A(i, i) = beta(k++);
  }
  if (kind == PolyKind::FullQuadratic) {
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = i + 1; j < d; ++j) {
        m.A(i, j) = 0.5 * beta(k);
        m.A(j, i) = 0.5 * beta(k);
        ++k;
      }
  }
  return m;
}

}  // namespace detail

/// Least-squares polynomial fit in z = basis (x - center). A rank-deficient
/// design falls back FullQuadratic -> PureQuadratic -> Linear -> NotTrained.
inline FitResult<PolyModel> fit_quadratic_ls(const SampleSet& t, PolyKind kind, const Vector& center,
                                             const Matrix& basis) {
  const SampleSet known = t.known();
  if (known.empty()) return NotTrained{"no evaluated training points"};
  require(center.size() == known.dim() && basis.cols() == known.dim(), ErrorCode::DimensionMismatch,
          "polynomial basis differs from data dimension");
  for (PolyKind k = kind;; k = detail::lower(k)) {
    if (auto m = detail::fit_exact_kind(known, k, center, basis)) return *m;
    if (k == PolyKind::Linear) break;
  }
  return NotTrained{"design matrix rank deficient even for the linear model"};
}

inline FitResult<PolyModel> fit_quadratic_ls(const SampleSet& t, PolyKind kind) {
  if (t.empty()) return NotTrained{"empty training set"};
  const auto d = t.dim();
  return fit_quadratic_ls(t, kind, Vector::Zero(d), Matrix::Identity(d, d));
}

/// Model-kind ladder of the linear-quadratic surrogate.
struct LqConfig {
  double tau = 1.5;
};

inline std::optional<PolyKind> lq_kind(std::size_t n, Eigen::Index d, const LqConfig& cfg = {}) {
  const double dd = static_cast<double>(d);
  const double nn = static_cast<double>(n);
  if (nn >= cfg.tau * (dd * dd + 3.0 * dd + 2.0) / 2.0) return PolyKind::FullQuadratic;
  if (nn >= cfg.tau * (2.0 * dd + 1.0)) return PolyKind::PureQuadratic;
  if (nn >= dd + 2.0) return PolyKind::Linear;
  return std::nullopt;
}

inline FitResult<PolyModel> train_lq(const SampleSet& t, const LqConfig& cfg = {}) {
  const SampleSet known = t.known();
  if (known.empty()) return NotTrained{"empty training set"};
  const auto kind = lq_kind(known.size(), known.dim(), cfg);
  if (!kind) return NotTrained{"too few points for the linear model"};
  return fit_quadratic_ls(known, *kind);
}

/// Default lmm neighbourhood: twice the full-quadratic coefficient count.
inline int lmm_default_k(Eigen::Index d) { return static_cast<int>(2 * (d * (d + 3) / 2 + 1)); }

/// Local full-quadratic models fitted on the k nearest archive points
/// (sigma^2 C metric) of each point to predict.
class LmmModel {
 public:
  LmmModel(SampleSet archive, DistributionState state, int k)
      : archive_(std::move(archive)), state_(std::move(state)), k_(k), metric_(Metric::mahalanobis(state_)) {
    basis_ = linalg::SymmetricEigen(state_.cov).inv_sqrt() / state_.sigma;
  }

  /// Local model centred at `query`.
  FitResult<PolyModel> local_model(const Point& query) const {
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(archive_.size());
    for (std::size_t i = 0; i < archive_.size(); ++i) dist.emplace_back(metric_(archive_.points[i], query), i);
    std::sort(dist.begin(), dist.end());
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < std::min<std::size_t>(static_cast<std::size_t>(k_), dist.size()); ++i)
      idx.push_back(dist[i].second);
    return fit_quadratic_ls(archive_.select(idx), PolyKind::FullQuadratic, query, basis_);
  }

  double predict(const Point& x) const {
    auto m = local_model(x);
    if (!m) throw Error(ErrorCode::Undefined, "lmm local fit failed: " + m.reason());
    return m->predict(x);
  }

  int k() const noexcept { return k_; }

 private:
  SampleSet archive_;
  DistributionState state_;
  int k_;
  Metric metric_;
  Matrix basis_;
};

/// Validates the archive size and builds the lazy per-query model.
inline FitResult<LmmModel> make_lmm(const SampleSet& archive, int k, const DistributionState& state) {
  const SampleSet known = archive.known();
  const auto d = state.dim();
  const auto minimum = static_cast<int>(d * (d + 3) / 2 + 1);
  if (k < minimum) return NotTrained{"lmm k below the full-quadratic coefficient count"};
  if (known.size() < static_cast<std::size_t>(k)) return NotTrained{"archive smaller than lmm k"};
  return LmmModel(known, state, k);
}

/// One full-quadratic model per query point.
inline FitResult<std::vector<PolyModel>> train_lmm(const SampleSet& archive, const std::vector<Point>& queries, int k,
                                                   const DistributionState& state) {
  auto lmm = make_lmm(archive, k, state);
  if (!lmm) return NotTrained{lmm.reason()};
  std::vector<PolyModel> out;
  for (const auto& q : queries) {
    auto m = lmm->local_model(q);
    if (!m) return NotTrained{m.reason()};
    out.push_back(*m);
  }
  return out;
}

}  // namespace elas::models

#endif  // ELAS_MODELS_POLYNOMIAL_HPP
