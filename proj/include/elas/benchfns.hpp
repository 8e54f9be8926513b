#ifndef ELAS_BENCHFNS_HPP
#define ELAS_BENCHFNS_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "elas/core/error.hpp"
#include "elas/core/random.hpp"
#include "elas/core/types.hpp"

namespace elas::bench {

enum class BaseFunction { Sphere, Ellipsoid, Rosenbrock, Rastrigin };

/// Search domain [-kDomainBound, kDomainBound]^d.
inline constexpr double kDomainBound = 5.0;

inline std::string_view to_string(BaseFunction f) {
  switch (f) {
    case BaseFunction::Sphere: return "sphere";
    case BaseFunction::Ellipsoid: return "ellipsoid";
    case BaseFunction::Rosenbrock: return "rosenbrock";
    case BaseFunction::Rastrigin: return "rastrigin";
  }
  return "?";
}

inline BaseFunction parse_base(std::string_view name) {
  if (name == "sphere") return BaseFunction::Sphere;
  if (name == "ellipsoid") return BaseFunction::Ellipsoid;
  if (name == "rosenbrock") return BaseFunction::Rosenbrock;
  if (name == "rastrigin") return BaseFunction::Rastrigin;
  throw Error(ErrorCode::Config, "unknown base function '" + std::string(name) + "'");
}

/// Raw base function at z (no instance transform).
inline double base_value(BaseFunction f, const Vector& z) {
  const auto d = z.size();
  switch (f) {
    case BaseFunction::Sphere:
      return z.squaredNorm();
    case BaseFunction::Ellipsoid: {
      double s = 0.0;
      for (Eigen::Index i = 0; i < d; ++i) {
        const double e = d > 1 ? 6.0 * static_cast<double>(i) / static_cast<double>(d - 1) : 0.0;
        s += std::pow(10.0, e) * z(i) * z(i);
      }
      return s;
    }
    case BaseFunction::Rosenbrock: {
      if (d == 1) return (1.0 - z(0)) * (1.0 - z(0));
      double s = 0.0;
      for (Eigen::Index i = 0; i + 1 < d; ++i) {
        const double a = z(i + 1) - z(i) * z(i);
        s += 100.0 * a * a + (1.0 - z(i)) * (1.0 - z(i));
      }
      return s;
    }
    case BaseFunction::Rastrigin: {
      double s = 10.0 * static_cast<double>(d);
      for (Eigen::Index i = 0; i < d; ++i) s += z(i) * z(i) - 10.0 * std::cos(2.0 * std::numbers::pi * z(i));
      return s;
    }
  }
  return 0.0;
}

/// A translated/rotated instance of a base function with evaluation counting.
class ObjectiveInstance {
 public:
  ObjectiveInstance(BaseFunction base, Matrix rotation, Vector x_opt, double f_shift, std::uint64_t seed = 0)
      : base_(base), rotation_(std::move(rotation)), x_opt_(std::move(x_opt)), f_shift_(f_shift), seed_(seed) {
    require(rotation_.rows() == x_opt_.size() && rotation_.cols() == x_opt_.size(), ErrorCode::DimensionMismatch,
            "rotation size differs from shift dimension");
  }

  /// base(R (x - x_opt)) + f_shift; counts the evaluation.
  double evaluate(const Point& x) {
    require(x.size() == x_opt_.size(), ErrorCode::DimensionMismatch, "point dimension differs from instance");
    ++eval_count_;
    return base_value(base_, rotation_ * (x - x_opt_)) + f_shift_;
  }

  BaseFunction base() const noexcept { return base_; }
  Eigen::Index dim() const noexcept { return x_opt_.size(); }
  const Matrix& rotation() const noexcept { return rotation_; }
  const Vector& x_opt() const noexcept { return x_opt_; }
  double f_shift() const noexcept { return f_shift_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t eval_count() const noexcept { return eval_count_; }

 private:
  BaseFunction base_;
  Matrix rotation_;
  Vector x_opt_;
  double f_shift_;
  std::uint64_t seed_;
  std::uint64_t eval_count_ = 0;
};

/// Deterministic instance per (base, d, seed). Seed 0 is the untransformed
/// canonical instance.
inline ObjectiveInstance make_instance(BaseFunction base, Eigen::Index d, std::uint64_t seed) {
  require(d >= 1, ErrorCode::InvalidArgument, "dimension must be >= 1");
  if (seed == 0) return ObjectiveInstance(base, Matrix::Identity(d, d), Vector::Zero(d), 0.0, 0);
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(base) * 1000 + static_cast<std::uint64_t>(d)));
  Matrix g(d, d);
  for (Eigen::Index j = 0; j < d; ++j) g.col(j) = standard_normal(rng, d);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < d; ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  Vector x_opt(d);
  for (Eigen::Index i = 0; i < d; ++i) x_opt(i) = uniform(rng, -4.0, 4.0);
  const double f_shift = uniform(rng, -100.0, 100.0);
  return ObjectiveInstance(base, std::move(q), std::move(x_opt), f_shift, seed);
}

/// Instance descriptor {base, d, seed}.
inline nlohmann::json descriptor(const ObjectiveInstance& inst) {
  return {{"base", std::string(to_string(inst.base()))}, {"d", inst.dim()}, {"seed", inst.seed()}};
}

inline ObjectiveInstance from_descriptor(const nlohmann::json& j) {
  try {
    return make_instance(parse_base(j.at("base").get<std::string>()), j.at("d").get<Eigen::Index>(),
                         j.at("seed").get<std::uint64_t>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, std::string("malformed instance descriptor: ") + e.what());
  }
}

}  // namespace elas::bench

#endif  // ELAS_BENCHFNS_HPP
