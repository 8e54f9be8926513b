#ifndef ELAS_MODELS_GP_HPP
#define ELAS_MODELS_GP_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "elas/core/optim.hpp"
#include "elas/core/random.hpp"
#include "elas/core/stats.hpp"
#include "elas/core/types.hpp"
#include "elas/models/fit_result.hpp"

namespace elas::models {

enum class CovKind { LIN, QUAD, SE, MAT52, RQ, NN, GIBBS, SE_Q };

inline std::string to_string(CovKind k) {
  switch (k) {
    case CovKind::LIN: return "LIN";
    case CovKind::QUAD: return "QUAD";
    case CovKind::SE: return "SE";
    case CovKind::MAT52: return "MAT52";
    case CovKind::RQ: return "RQ";
    case CovKind::NN: return "NN";
    case CovKind::GIBBS: return "GIBBS";
    case CovKind::SE_Q: return "SE_Q";
  }
  return "?";
}

inline CovKind parse_cov_kind(const std::string& s) {
  for (auto k : {CovKind::LIN, CovKind::QUAD, CovKind::SE, CovKind::MAT52, CovKind::RQ, CovKind::NN, CovKind::GIBBS,
                 CovKind::SE_Q})
    if (to_string(k) == s) return k;
  throw Error(ErrorCode::Config, "unknown GP covariance '" + s + "'");
}

/// Covariance hyperparameters. Only the fields used by a kind matter.
struct CovParams {
  double sigma_f = 1.0;
  double ell = 1.0;
  double alpha = 1.0;      // RQ shape
  double sigma0_sq = 1.0;  // LIN / QUAD bias
  double gibbs_a = 0.0;    // GIBBS: ell(x) = exp(a + b^T x)
  Vector gibbs_b;
};

inline double gibbs_length(const CovParams& p, const Point& x) {
  const double lin = p.gibbs_b.size() == x.size() ? p.gibbs_b.dot(x) : 0.0;
  return std::exp(p.gibbs_a + lin);
}

/// k(x, x') for one of the eight covariance functions.
inline double gp_cov(CovKind kind, const Point& x, const Point& xq, const CovParams& p) {
  require_same_dim(x, xq);
  const double sf2 = p.sigma_f * p.sigma_f;
  auto lin = [&] { return p.sigma0_sq + x.dot(xq); };
  auto se = [&] {
    const double r2 = (x - xq).squaredNorm();
    return sf2 * std::exp(-r2 / (2.0 * p.ell * p.ell));
  };
  switch (kind) {
    case CovKind::LIN:
      return lin();
    case CovKind::QUAD: {
      const double l = lin();
      return l * l;
    }
    case CovKind::SE:
      return se();
    case CovKind::MAT52: {
      const double r = (x - xq).norm();
      const double s = std::sqrt(5.0) * r / p.ell;
      return sf2 * (1.0 + s + 5.0 * r * r / (3.0 * p.ell * p.ell)) * std::exp(-s);
    }
    case CovKind::RQ: {
      require(p.alpha > 0.0, ErrorCode::InvalidHyperparameter, "RQ covariance needs alpha > 0");
      const double r2 = (x - xq).squaredNorm();
      return sf2 * std::pow(1.0 + r2 / (2.0 * p.ell * p.ell * p.alpha), -p.alpha);
    }
    case CovKind::NN: {
      const double inv = 1.0 / (p.ell * p.ell);
      const double pq = (1.0 + x.dot(xq)) * inv;
      const double pp = (1.0 + x.squaredNorm()) * inv;
      const double qq = (1.0 + xq.squaredNorm()) * inv;
      const double arg = 2.0 * pq / std::sqrt((1.0 + 2.0 * pp) * (1.0 + 2.0 * qq));
      return sf2 * std::asin(std::clamp(arg, -1.0, 1.0));
    }
    case CovKind::GIBBS: {
      const double lp = gibbs_length(p, x);
      const double lq = gibbs_length(p, xq);
      const double s = lp * lp + lq * lq;
      const double d = static_cast<double>(x.size());
      return sf2 * std::pow(2.0 * lp * lq / s, d / 2.0) * std::exp(-(x - xq).squaredNorm() / s);
    }
    case CovKind::SE_Q: {
      const double l = lin();
      return se() + l * l;
    }
  }
  return 0.0;
}

/// Full GP hyperparameter set.
struct GpHyper {
  CovParams cov;
  double noise_var = 1e-4;  // sigma_n^2
  double mean = 0.0;        // m_GP
};

struct GpConfig {
  int restarts = 4;
  int max_evaluations = 300;  // per local search
  std::optional<double> fixed_noise_var;
  std::uint64_t seed = 0;
};

class GpModel {
 public:
  CovKind kind() const noexcept { return kind_; }
  const GpHyper& hyper() const noexcept { return hyper_; }
  double nll() const noexcept { return nll_; }
  double jitter() const noexcept { return jitter_; }
  /// Negative log-likelihood at each optimizer start and each accepted
  /// best value of the winning local search.
  const std::vector<double>& start_nlls() const noexcept { return start_nlls_; }
  const std::vector<double>& trace() const noexcept { return trace_; }

  /// Posterior mean and variance at x.
  std::pair<double, double> predict(const Point& x) const {
    const auto n = static_cast<Eigen::Index>(x_.size());
    Vector k_star(n);
    for (Eigen::Index i = 0; i < n; ++i) k_star(i) = gp_cov(kind_, x_[static_cast<std::size_t>(i)], x, hyper_.cov);
    const double mean = hyper_.mean + k_star.dot(weights_);
    const Vector v = chol_.matrixL().solve(k_star);
    const double var = gp_cov(kind_, x, x, hyper_.cov) - v.squaredNorm();
    return {mean, std::max(0.0, var)};
  }

  double predict_mean(const Point& x) const { return predict(x).first; }

  /// Conditions a GP with fixed hyperparameters on data; nullopt if the
  /// covariance cannot be factorised even with the maximal jitter.
  static std::optional<GpModel> condition(const SampleSet& data, CovKind kind, const GpHyper& hyper) {
    GpModel m;
    m.kind_ = kind;
    m.hyper_ = hyper;
    for (std::size_t i = 0; i < data.size(); ++i) {
      require(data.outputs[i].has_value(), ErrorCode::InvalidArgument, "GP training data has missing outputs");
      m.x_.push_back(data.points[i]);
    }
    const auto n = static_cast<Eigen::Index>(data.size());
    m.y_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) m.y_(i) = *data.outputs[static_cast<std::size_t>(i)];
    const auto nll = m.factorize();
    if (!nll) return std::nullopt;
    m.nll_ = *nll;
    return m;
  }

  /// Negative log of the Gaussian density of y under the given hyperparameters.
  static double negative_log_likelihood(const SampleSet& data, CovKind kind, const GpHyper& hyper) {
    auto m = condition(data, kind, hyper);
    return m ? m->nll_ : std::numeric_limits<double>::infinity();
  }

 private:
  friend FitResult<GpModel> gp_fit(const SampleSet&, CovKind, const GpConfig&);

  std::optional<double> factorize() {
    const auto n = static_cast<Eigen::Index>(x_.size());
    Matrix k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j <= i; ++j) {
        const double v = gp_cov(kind_, x_[static_cast<std::size_t>(i)], x_[static_cast<std::size_t>(j)], hyper_.cov);
        k(i, j) = v;
        k(j, i) = v;
      }
    if (!k.allFinite()) return std::nullopt;
    const double scale = std::max(k.trace() / static_cast<double>(n), 1e-300);
    // jitter ladder: none, then 1e-10 .. 1e-4 of the average prior variance
    for (int e = -11; e <= -4; ++e) {
      jitter_ = e == -11 ? 0.0 : std::pow(10.0, e) * scale;
      Matrix ky = k;
      ky.diagonal().array() += hyper_.noise_var + jitter_;
      chol_.compute(ky);
      if (chol_.info() != Eigen::Success) continue;
      const Vector r = y_.array() - hyper_.mean;
      weights_ = chol_.solve(r);
      if (!weights_.allFinite()) continue;
      const Matrix& l = chol_.matrixLLT();
      double log_det = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) log_det += 2.0 * std::log(l(i, i));
      const double v = 0.5 * r.dot(weights_) + 0.5 * log_det + 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
      if (std::isfinite(v)) return v;
    }
    return std::nullopt;
  }

  CovKind kind_ = CovKind::SE;
  GpHyper hyper_;
  std::vector<Point> x_;
  Vector y_;
  Eigen::LLT<Matrix> chol_;
  Vector weights_;
  double nll_ = std::numeric_limits<double>::infinity();
  double jitter_ = 0.0;
  std::vector<double> start_nlls_;
  std::vector<double> trace_;
};

namespace detail {

inline constexpr double kLogBound = 12.0;

/// Log-parameterised search vector <-> hyperparameters for one kind.
struct GpParameterization {
  CovKind kind;
  Eigen::Index dim;
  bool fit_noise;

  Eigen::Index cov_size() const {
    switch (kind) {
      case CovKind::LIN:
      case CovKind::QUAD: return 1;
      case CovKind::SE:
      case CovKind::MAT52:
      case CovKind::NN: return 2;
      case CovKind::RQ:
      case CovKind::SE_Q: return 3;
      case CovKind::GIBBS: return 2 + dim;
    }
    return 0;
  }

  Eigen::Index size() const { return cov_size() + (fit_noise ? 1 : 0) + 1; }

  GpHyper decode(const Vector& v, double fixed_noise) const {
    GpHyper h;
    switch (kind) {
      case CovKind::LIN:
      case CovKind::QUAD:
        h.cov.sigma0_sq = std::exp(2.0 * v(0));
        break;
      case CovKind::SE:
      case CovKind::MAT52:
      case CovKind::NN:
        h.cov.sigma_f = std::exp(v(0));
        h.cov.ell = std::exp(v(1));
        break;
      case CovKind::RQ:
        h.cov.sigma_f = std::exp(v(0));
        h.cov.ell = std::exp(v(1));
        h.cov.alpha = std::exp(v(2));
        break;
      case CovKind::SE_Q:
        h.cov.sigma_f = std::exp(v(0));
        h.cov.ell = std::exp(v(1));
        h.cov.sigma0_sq = std::exp(2.0 * v(2));
        break;
      case CovKind::GIBBS:
        h.cov.sigma_f = std::exp(v(0));
        h.cov.gibbs_a = v(1);
        h.cov.gibbs_b = v.segment(2, dim);
        break;
    }
    Eigen::Index k = cov_size();
    h.noise_var = fit_noise ? std::exp(2.0 * v(k++)) : fixed_noise;
    h.mean = v(k);
    return h;
  }

  Vector initial(double log_ell, double log_sf, double mean) const {
    Vector v = Vector::Zero(size());
    switch (kind) {
      case CovKind::LIN:
      case CovKind::QUAD: v(0) = 0.0; break;
      case CovKind::SE:
      case CovKind::MAT52:
      case CovKind::NN: v(0) = log_sf; v(1) = log_ell; break;
      case CovKind::RQ: v(0) = log_sf; v(1) = log_ell; v(2) = 0.0; break;
      case CovKind::SE_Q: v(0) = log_sf; v(1) = log_ell; v(2) = 0.0; break;
      case CovKind::GIBBS: v(0) = log_sf; v(1) = log_ell; break;
    }
    Eigen::Index k = cov_size();
    if (fit_noise) v(k++) = log_sf + std::log(1e-2);
    v(k) = mean;
    return v;
  }

  /// Log-scale entries are confined to a box; GIBBS slopes and the mean are free.
  bool in_box(const Vector& v) const {
    const Eigen::Index logs = kind == CovKind::GIBBS ? 1 : cov_size();
    for (Eigen::Index i = 0; i < logs; ++i)
      if (std::abs(v(i)) > kLogBound) return false;
    if (kind == CovKind::GIBBS && std::abs(v(1)) > kLogBound) return false;
    if (fit_noise && std::abs(v(cov_size())) > kLogBound) return false;
    return true;
  }
};

}  // namespace detail

/// Maximum-likelihood GP: multi-start Nelder-Mead over log hyperparameters,
/// the noise variance (unless fixed) and the constant mean.
inline FitResult<GpModel> gp_fit(const SampleSet& t, CovKind kind, const GpConfig& config = {}) {
  const SampleSet data = t.known();
  if (data.size() < 2) return NotTrained{"GP needs at least 2 evaluated points"};
  if (data.size() != t.size()) return NotTrained{"GP training data has missing outputs"};
  const auto d = data.dim();

  std::vector<double> dists;
  for (std::size_t i = 0; i < data.size(); ++i)
    for (std::size_t j = i + 1; j < data.size(); ++j) dists.push_back((data.points[i] - data.points[j]).norm());
  double ell0 = stats::median(dists);
  if (!(ell0 > 0.0)) ell0 = 1.0;
  const auto ys = data.known_outputs();
  double sf0 = stats::sample_std(ys);
  if (!(sf0 > 1e-12)) sf0 = 1e-3;
  const double mean0 = stats::mean(ys);

  const detail::GpParameterization param{kind, d, !config.fixed_noise_var.has_value()};
  const double fixed_noise = config.fixed_noise_var.value_or(0.0);
  auto objective = [&](const Vector& v) {
    if (!param.in_box(v)) return std::numeric_limits<double>::infinity();
    return GpModel::negative_log_likelihood(data, kind, param.decode(v, fixed_noise));
  };

  Rng rng(config.seed);
  const Vector base = param.initial(std::log(ell0), std::log(sf0), mean0);
  optim::NelderMeadOptions nm;
  nm.max_evaluations = config.max_evaluations;

  std::optional<optim::NelderMeadResult> best;
  std::vector<double> start_values;
  for (int r = 0; r < std::max(1, config.restarts); ++r) {
    Vector start = base;
    if (r > 0) {
      const Vector z = standard_normal(rng, base.size());
      start += z;
      start(start.size() - 1) = mean0 + 0.1 * sf0 * z(z.size() - 1);
    }
    start_values.push_back(objective(start));
    auto res = optim::nelder_mead(objective, start, nm);
    if (std::isfinite(res.value) && (!best || res.value < best->value)) best = std::move(res);
  }
  if (!best) return NotTrained{"GP likelihood could not be evaluated at any start"};
  auto model = GpModel::condition(data, kind, param.decode(best->x, fixed_noise));
  if (!model) return NotTrained{"GP covariance factorisation failed"};
  model->start_nlls_ = std::move(start_values);
  model->trace_ = best->trace;
  return std::move(*model);
}

}  // namespace elas::models

#endif  // ELAS_MODELS_GP_HPP
