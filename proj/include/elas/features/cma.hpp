#ifndef ELAS_FEATURES_CMA_HPP
#define ELAS_FEATURES_CMA_HPP

#include <cmath>
#include <numbers>

#include "elas/core/linalg.hpp"
#include "elas/features/common.hpp"

namespace elas::features {

/// ||p_sigma|| Gamma(d/2) / (sqrt(2) Gamma((d+1)/2)).
inline double evopath_s_norm(const Vector& p_sigma) {
  const double d = static_cast<double>(p_sigma.size());
  return p_sigma.norm() * std::exp(std::lgamma(d / 2.0) - std::lgamma((d + 1.0) / 2.0)) / std::sqrt(2.0);
}

/// Features of the CMA-ES state alone: generation, step size, restarts and
/// both evolution-path lengths.
inline FeatureList cma_state_features(const DistributionState& s) {
  return {{"cma.generation", static_cast<double>(s.generation)},
          {"cma.step_size", s.sigma},
          {"cma.restart", static_cast<double>(s.restarts)},
          {"cma.evopath_c_norm", s.p_c.squaredNorm()},
          {"cma.evopath_s_norm", evopath_s_norm(s.p_sigma)}};
}

/// Mahalanobis distance of the CMA mean to the sample mean under the sample
/// covariance of the points; NAN_OUT if that covariance is singular.
inline double mean_dist(const DistributionState& s, const std::vector<Point>& pts) {
  const auto n = pts.size();
  if (n < 2) return kNanOut;
  const auto d = s.dim();
  Vector mu = Vector::Zero(d);
  for (const auto& x : pts) mu += x;
  mu /= static_cast<double>(n);
  Matrix cx = Matrix::Zero(d, d);
  for (const auto& x : pts) cx += (x - mu) * (x - mu).transpose();
  cx /= static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> es(cx);
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  if (!(top > 0.0) || es.eigenvalues().minCoeff() <= 1e-12 * top) return kNanOut;
  const Vector diff = s.mean - mu;
  const Vector w = es.eigenvectors().transpose() * diff;
  return std::sqrt((w.array().square() / es.eigenvalues().array()).sum());
}

/// Gaussian log-likelihood of the points under N(m, sigma^2 C).
inline double cma_lik(const DistributionState& s, const std::vector<Point>& pts) {
  if (pts.empty()) return kNanOut;
  const auto llt = linalg::spd_cholesky(s.cov);
  const double d = static_cast<double>(s.dim());
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < s.dim(); ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
  double quad = 0.0;
  for (const auto& x : pts) quad += llt.matrixL().solve((x - s.mean) / s.sigma).squaredNorm();
  const double n = static_cast<double>(pts.size());
  return -0.5 * n * (d * std::log(2.0 * std::numbers::pi * s.sigma * s.sigma) + log_det) - 0.5 * quad;
}

inline FeatureList cma_set_features(const DistributionState& s, const SampleSet& set) {
  return {{"cma.mean_dist", mean_dist(s, set.points)}, {"cma.cma_lik", cma_lik(s, set.points)}};
}

}  // namespace elas::features

#endif  // ELAS_FEATURES_CMA_HPP
