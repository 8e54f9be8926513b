#ifndef ELAS_CORE_TYPES_HPP
#define ELAS_CORE_TYPES_HPP

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "elas/core/error.hpp"

namespace elas {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Point = Eigen::VectorXd;

/// An objective value that may be absent (a point that was not evaluated).
using Output = std::optional<double>;

inline constexpr std::nullopt_t kMissing = std::nullopt;

/// Paired inputs and (possibly missing) outputs.
struct SampleSet {
  std::vector<Point> points;
  std::vector<Output> outputs;

  SampleSet() = default;
  SampleSet(std::vector<Point> pts, std::vector<Output> ys)
      : points(std::move(pts)), outputs(std::move(ys)) {
    require(points.size() == outputs.size(), ErrorCode::DimensionMismatch,
            "SampleSet points/outputs length differ");
  }

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
  Eigen::Index dim() const noexcept { return points.empty() ? 0 : points.front().size(); }

  void push_back(Point x, Output y) {
    points.push_back(std::move(x));
    outputs.push_back(y);
  }

  void append(const SampleSet& other) {
    points.insert(points.end(), other.points.begin(), other.points.end());
    outputs.insert(outputs.end(), other.outputs.begin(), other.outputs.end());
  }

  std::size_t count_missing() const {
    std::size_t n = 0;
    for (const auto& y : outputs) n += y.has_value() ? 0 : 1;
    return n;
  }

  /// Non-missing outputs, in order.
  std::vector<double> known_outputs() const {
    std::vector<double> ys;
    ys.reserve(outputs.size());
    for (const auto& y : outputs)
      if (y) ys.push_back(*y);
    return ys;
  }

  /// Subset with only the evaluated pairs.
  SampleSet known() const {
    SampleSet s;
    for (std::size_t i = 0; i < size(); ++i)
      if (outputs[i]) s.push_back(points[i], outputs[i]);
    return s;
  }

  SampleSet select(const std::vector<std::size_t>& idx) const {
    SampleSet s;
    s.points.reserve(idx.size());
    s.outputs.reserve(idx.size());
    for (auto i : idx) s.push_back(points.at(i), outputs.at(i));
    return s;
  }

  /// Points stacked as rows.
  Matrix as_matrix() const {
    Matrix m(static_cast<Eigen::Index>(size()), dim());
    for (std::size_t i = 0; i < size(); ++i) m.row(static_cast<Eigen::Index>(i)) = points[i].transpose();
    return m;
  }
};

/// CMA-ES distribution state (m, sigma, C, evolution paths, counters).
struct DistributionState {
  Vector mean;
  double sigma = 1.0;
  Matrix cov;
  Vector p_sigma;
  Vector p_c;
  long generation = 0;
  long restarts = 0;

  Eigen::Index dim() const noexcept { return mean.size(); }

  static DistributionState initial(const Vector& m0, double sigma0) {
    DistributionState s;
    const auto d = m0.size();
    s.mean = m0;
    s.sigma = sigma0;
    s.cov = Matrix::Identity(d, d);
    s.p_sigma = Vector::Zero(d);
    s.p_c = Vector::Zero(d);
    return s;
  }
};

/// Checks the structural invariants of a state; throws on violation.
inline void validate(const DistributionState& s) {
  const auto d = s.mean.size();
  require(d >= 1, ErrorCode::DimensionMismatch, "state dimension must be >= 1");
  require(s.cov.rows() == d && s.cov.cols() == d && s.p_sigma.size() == d && s.p_c.size() == d,
          ErrorCode::DimensionMismatch, "state component sizes differ");
  require(std::isfinite(s.sigma) && s.sigma > 0.0, ErrorCode::DegenerateCovariance, "sigma must be positive");
  const double scale = std::max(1.0, s.cov.cwiseAbs().maxCoeff());
  require((s.cov - s.cov.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * scale, ErrorCode::DegenerateCovariance,
          "covariance is not symmetric");
  require(s.cov.allFinite() && Eigen::LLT<Matrix>(s.cov).info() == Eigen::Success, ErrorCode::DegenerateCovariance,
          "covariance is not positive definite");
}

inline void require_same_dim(const Vector& a, const Vector& b) {
  require(a.size() == b.size(), ErrorCode::DimensionMismatch, "vector dimensions differ");
}

}  // namespace elas

#endif  // ELAS_CORE_TYPES_HPP
