#ifndef ELAS_CORE_TRANSFORM_HPP
#define ELAS_CORE_TRANSFORM_HPP

#include <cmath>
#include <numeric>
#include <vector>

#include "elas/core/linalg.hpp"
#include "elas/core/types.hpp"

namespace elas {

/// sqrt((x-y)^T sigma^-2 C^-1 (x-y)).
inline double mahalanobis_distance(const Point& x, const Point& y, double sigma, const Matrix& cov) {
  require_same_dim(x, y);
  require(cov.rows() == x.size() && cov.cols() == x.size(), ErrorCode::DimensionMismatch,
          "covariance size differs from point dimension");
  require(sigma > 0.0 && std::isfinite(sigma), ErrorCode::DegenerateCovariance, "sigma must be positive");
  const auto llt = linalg::spd_cholesky(cov);
  const Vector w = llt.matrixL().solve(x - y);
  return w.norm() / sigma;
}

/// Affine map into the sigma^2 C basis plus output standardization.
struct TransformSpec {
  Vector mean;
  Matrix root_inv;  // C^{-1/2} / sigma
  double y_shift = 0.0;
  double y_scale = 1.0;

  Point to_basis(const Point& x) const {
    require_same_dim(x, mean);
    return root_inv * (x - mean);
  }

  Point from_basis(const Point& z) const {
    require_same_dim(z, mean);
    return root_inv.partialPivLu().solve(z) + mean;
  }

  double normalize_y(double y) const { return (y - y_shift) / y_scale; }
};

namespace detail {
inline double population_std(const std::vector<double>& ys, double mean) {
  double ss = 0.0;
  for (double y : ys) ss += (y - mean) * (y - mean);
  return std::sqrt(ss / static_cast<double>(ys.size()));
}
}  // namespace detail

/// Builds the sigma^2 C basis transform and the output standardization.
inline TransformSpec make_transform(const DistributionState& state, const std::vector<double>& y_train) {
  validate(state);
  require(!y_train.empty(), ErrorCode::EmptyInput, "make_transform needs at least one output");
  TransformSpec t;
  t.mean = state.mean;
  t.root_inv = linalg::SymmetricEigen(state.cov).inv_sqrt() / state.sigma;
  const double mean = std::accumulate(y_train.begin(), y_train.end(), 0.0) / static_cast<double>(y_train.size());
  const double sd = detail::population_std(y_train, mean);
  t.y_shift = mean;
  t.y_scale = sd < 1e-14 ? 1.0 : sd;
  return t;
}

/// Input-only transform (outputs untouched), used for feature sample sets.
inline TransformSpec make_input_transform(const DistributionState& state) {
  validate(state);
  TransformSpec t;
  t.mean = state.mean;
  t.root_inv = linalg::SymmetricEigen(state.cov).inv_sqrt() / state.sigma;
  return t;
}

inline SampleSet apply_transform(const TransformSpec& t, const SampleSet& s) {
  SampleSet out;
  out.points.reserve(s.size());
  out.outputs.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    out.points.push_back(t.to_basis(s.points[i]));
    out.outputs.push_back(s.outputs[i] ? Output(t.normalize_y(*s.outputs[i])) : kMissing);
  }
  return out;
}

inline double invert_transform_y(const TransformSpec& t, double y) { return y * t.y_scale + t.y_shift; }

/// Inverse of apply_transform.
inline SampleSet invert_transform(const TransformSpec& t, const SampleSet& s) {
  SampleSet out;
  for (std::size_t i = 0; i < s.size(); ++i)
    out.push_back(t.from_basis(s.points[i]), s.outputs[i] ? Output(invert_transform_y(t, *s.outputs[i])) : kMissing);
  return out;
}

/// The distribution state expressed in the transformed basis.
inline DistributionState transform_state(const TransformSpec& t, const DistributionState& s) {
  DistributionState out = s;
  out.mean = Vector::Zero(s.dim());
  out.sigma = 1.0;
  Matrix c = t.root_inv * (s.sigma * s.sigma * s.cov) * t.root_inv.transpose();
  out.cov = 0.5 * (c + c.transpose());
  return out;
}

/// Distance used by geometric features and training-set selection.
/// Euclidean by default; Mahalanobis for sigma^2 C when built from a state.
class Metric {
 public:
  Metric() = default;

  static Metric euclidean() { return Metric(); }

  static Metric mahalanobis(double sigma, const Matrix& cov) {
    require(sigma > 0.0, ErrorCode::DegenerateCovariance, "sigma must be positive");
    Metric m;
    m.chol_ = linalg::spd_cholesky(cov * (sigma * sigma)).matrixL();
    return m;
  }

  static Metric mahalanobis(const DistributionState& s) { return mahalanobis(s.sigma, s.cov); }

  double operator()(const Point& a, const Point& b) const {
    require_same_dim(a, b);
    if (chol_.size() == 0) return (a - b).norm();
    return chol_.triangularView<Eigen::Lower>().solve(a - b).norm();
  }

  bool is_euclidean() const noexcept { return chol_.size() == 0; }

 private:
  Matrix chol_;
};

}  // namespace elas

#endif  // ELAS_CORE_TRANSFORM_HPP
