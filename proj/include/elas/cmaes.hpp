#ifndef ELAS_CMAES_HPP
#define ELAS_CMAES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "elas/benchfns.hpp"
#include "elas/core/linalg.hpp"
#include "elas/core/random.hpp"
#include "elas/core/types.hpp"

namespace elas::cma {

/// Strategy parameters of a CMA-ES instance.
struct CmaParams {
  int lambda = 0;
  int mu = 0;
  std::vector<double> weights;
  double mu_w = 0.0;
  double c_sigma = 0.0;
  double d_sigma = 0.0;
  double c_c = 0.0;
  double c_1 = 0.0;
  double c_mu = 0.0;
  /// Apply the (1 - h_sigma) c_c (2 - c_c) variance-loss term when h_sigma = 0.
  bool hsig_correction = true;
};

/// E||N(0, I_d)|| = sqrt(2) Gamma((d+1)/2) / Gamma(d/2).
inline double expected_normal_norm(Eigen::Index d) {
  const double dd = static_cast<double>(d);
  return std::sqrt(2.0) * std::exp(std::lgamma((dd + 1.0) / 2.0) - std::lgamma(dd / 2.0));
}

/// Default population size 4 + floor(3 ln d).
inline int default_lambda(Eigen::Index d) {
  return 4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(d))));
}

inline CmaParams default_params(Eigen::Index d, std::optional<int> lambda = std::nullopt) {
  require(d >= 1, ErrorCode::InvalidArgument, "dimension must be >= 1");
  CmaParams p;
  p.lambda = lambda.value_or(default_lambda(d));
  require(p.lambda >= 2, ErrorCode::InvalidArgument, "lambda must be >= 2");
  p.mu = p.lambda / 2;
  const double dd = static_cast<double>(d);
  p.weights.resize(static_cast<std::size_t>(p.mu));
  for (int i = 0; i < p.mu; ++i) p.weights[static_cast<std::size_t>(i)] = std::log(p.mu + 0.5) - std::log(i + 1.0);
  const double sum = std::accumulate(p.weights.begin(), p.weights.end(), 0.0);
  for (auto& w : p.weights) w /= sum;
  double sq = 0.0;
  for (double w : p.weights) sq += w * w;
  p.mu_w = 1.0 / sq;
  p.c_sigma = (p.mu_w + 2.0) / (dd + p.mu_w + 5.0);
  p.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((p.mu_w - 1.0) / (dd + 1.0)) - 1.0) + p.c_sigma;
  p.c_c = (4.0 + p.mu_w / dd) / (dd + 4.0 + 2.0 * p.mu_w / dd);
  p.c_1 = 2.0 / ((dd + 1.3) * (dd + 1.3) + p.mu_w);
  p.c_mu = std::min(1.0 - p.c_1, 2.0 * (p.mu_w - 2.0 + 1.0 / p.mu_w) / ((dd + 2.0) * (dd + 2.0) + p.mu_w));
  return p;
}

/// lambda points m + sigma C^{1/2} z, z ~ N(0, I).
inline std::vector<Point> sample_population(const DistributionState& state, const CmaParams& params, Rng& rng) {
  validate(state);
  const Matrix root = linalg::SymmetricEigen(state.cov).sqrt();
  std::vector<Point> pop;
  pop.reserve(static_cast<std::size_t>(params.lambda));
  for (int k = 0; k < params.lambda; ++k) pop.push_back(state.mean + state.sigma * (root * standard_normal(rng, state.dim())));
  return pop;
}

using Evaluated = std::pair<Point, double>;

struct StepResult {
  DistributionState state;
  bool repaired = false;  // covariance needed an eigenvalue floor
};

/// One generation of the strategy: mean, evolution paths, h_sigma,
/// rank-one + rank-mu covariance update and step-size adaptation.
inline StepResult step(const DistributionState& state, const std::vector<Evaluated>& population, const CmaParams& params) {
  validate(state);
  require(static_cast<int>(population.size()) == params.lambda, ErrorCode::InvalidArgument,
          "population size differs from lambda");
  for (const auto& [x, f] : population) {
    require(std::isfinite(f), ErrorCode::InvalidFitness, "non-finite fitness value");
    require_same_dim(x, state.mean);
  }
  const auto d = state.dim();
  const double dd = static_cast<double>(d);

  std::vector<std::size_t> order(population.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return population[a].second < population[b].second; });

  Vector mean = Vector::Zero(d);
  for (int i = 0; i < params.mu; ++i) mean += params.weights[static_cast<std::size_t>(i)] * population[order[static_cast<std::size_t>(i)]].first;

  const linalg::SymmetricEigen eig(state.cov);
  const Matrix c_inv_sqrt = eig.inv_sqrt();
  const Vector shift = (mean - state.mean) / state.sigma;
  const double chi_n = expected_normal_norm(d);

  DistributionState next = state;
  next.mean = mean;
  next.p_sigma = (1.0 - params.c_sigma) * state.p_sigma +
                 std::sqrt(params.c_sigma * (2.0 - params.c_sigma) * params.mu_w) * (c_inv_sqrt * shift);

  const double ps_norm = next.p_sigma.norm();
  const double decay = std::sqrt(1.0 - std::pow(1.0 - params.c_sigma, 2.0 * static_cast<double>(state.generation + 1)));
  const bool h_sigma = ps_norm < decay * (1.4 + 2.0 / (dd + 1.0)) * chi_n;

  next.p_c = (1.0 - params.c_c) * state.p_c +
             (h_sigma ? std::sqrt(params.c_c * (2.0 - params.c_c) * params.mu_w) : 0.0) * shift;

  Matrix c_mu_mat = Matrix::Zero(d, d);
  for (int i = 0; i < params.mu; ++i) {
    const Vector y = (population[order[static_cast<std::size_t>(i)]].first - state.mean) / state.sigma;
    c_mu_mat += params.weights[static_cast<std::size_t>(i)] * (y * y.transpose());
  }

  double keep = 1.0 - params.c_1 - params.c_mu;
  if (!h_sigma && params.hsig_correction) keep += params.c_1 * params.c_c * (2.0 - params.c_c);
  Matrix cov = keep * state.cov + params.c_1 * (next.p_c * next.p_c.transpose()) + params.c_mu * c_mu_mat;
  cov = 0.5 * (cov + cov.transpose());

  StepResult result;
  const linalg::SymmetricEigen check(cov);
  if (check.repaired) {
    cov = check.reconstruct();
    cov = 0.5 * (cov + cov.transpose());
    result.repaired = true;
  }
  next.cov = std::move(cov);
  next.sigma = state.sigma * std::exp(params.c_sigma / params.d_sigma * (ps_norm / chi_n - 1.0));
  next.generation = state.generation + 1;
  result.state = std::move(next);
  return result;
}

inline DistributionState update(const DistributionState& state, const std::vector<Evaluated>& population,
                                const CmaParams& params) {
  return step(state, population, params).state;
}

enum class Termination { TargetReached, BudgetExhausted, Stagnation };

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::TargetReached: return "TargetReached";
    case Termination::BudgetExhausted: return "BudgetExhausted";
    case Termination::Stagnation: return "Stagnation";
  }
  return "?";
}

/// State used to sample one generation, with its slice of the archive.
struct GenerationSnapshot {
  DistributionState state;
  int lambda = 0;
  std::size_t archive_begin = 0;
  std::size_t archive_end = 0;
};

struct RunRecord {
  std::vector<GenerationSnapshot> generations;
  SampleSet archive;
  Termination termination = Termination::BudgetExhausted;
  int covariance_repairs = 0;

  double best_value() const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& y : archive.outputs)
      if (y) best = std::min(best, *y);
    return best;
  }

  /// Archive points evaluated strictly before generation index `g`.
  SampleSet archive_before(std::size_t g) const {
    require(g < generations.size(), ErrorCode::InvalidArgument, "generation index out of range");
    SampleSet s;
    for (std::size_t i = 0; i < generations[g].archive_begin; ++i) s.push_back(archive.points[i], archive.outputs[i]);
    return s;
  }

  /// The population evaluated in generation index `g`.
  SampleSet population(std::size_t g) const {
    require(g < generations.size(), ErrorCode::InvalidArgument, "generation index out of range");
    SampleSet s;
    for (std::size_t i = generations[g].archive_begin; i < generations[g].archive_end; ++i)
      s.push_back(archive.points[i], archive.outputs[i]);
    return s;
  }
};

struct RunOptions {
  std::uint64_t budget = 0;  // evaluations
  double target = 1e-8;      // precision relative to the instance optimum
  double sigma0 = 2.0;
  int restarts = 0;          // recorded in every snapshot
  std::uint64_t evaluations_used = 0;  // offset into a shared budget
};

/// Stagnation window: generations without an improvement of 1e-12.
inline long stagnation_generations(Eigen::Index d) { return 30 * static_cast<long>(d); }

namespace detail {

inline RunRecord run_from(bench::ObjectiveInstance& objective, const CmaParams& params, DistributionState state,
                          const RunOptions& opt, Rng& rng) {
  RunRecord rec;
  const double f_opt = objective.f_shift();
  double best = std::numeric_limits<double>::infinity();
  double last_improvement_best = best;
  long since_improvement = 0;
  std::uint64_t used = opt.evaluations_used;
  while (used + static_cast<std::uint64_t>(params.lambda) <= opt.budget) {
    GenerationSnapshot snap;
    snap.state = state;
    snap.lambda = params.lambda;
    snap.archive_begin = rec.archive.size();
    auto pop = sample_population(state, params, rng);
    std::vector<Evaluated> evaluated;
    evaluated.reserve(pop.size());
    for (auto& x : pop) {
      const double f = objective.evaluate(x);
      rec.archive.push_back(x, f);
      evaluated.emplace_back(std::move(x), f);
      best = std::min(best, f);
    }
    used += static_cast<std::uint64_t>(params.lambda);
    snap.archive_end = rec.archive.size();
    rec.generations.push_back(std::move(snap));

    if (best - f_opt <= opt.target) {
      rec.termination = Termination::TargetReached;
      return rec;
    }
    auto res = step(state, evaluated, params);
    rec.covariance_repairs += res.repaired ? 1 : 0;
    state = std::move(res.state);

    if (last_improvement_best - best > 1e-12) {
      last_improvement_best = best;
      since_improvement = 0;
    } else {
      ++since_improvement;
    }
    const double spread = state.sigma * std::sqrt(state.cov.diagonal().maxCoeff());
    if (since_improvement >= stagnation_generations(state.dim()) || !(spread > 1e-12) || !std::isfinite(spread)) {
      rec.termination = Termination::Stagnation;
      return rec;
    }
  }
  rec.termination = Termination::BudgetExhausted;
  return rec;
}

inline DistributionState initial_state(Eigen::Index d, double sigma0, long restarts, Rng& rng) {
  Vector m0(d);
  for (Eigen::Index i = 0; i < d; ++i) m0(i) = uniform(rng, -4.0, 4.0);
  auto s = DistributionState::initial(m0, sigma0);
  s.restarts = restarts;
  return s;
}

}  // namespace detail

/// Runs until the target precision, the budget or stagnation stops it.
/// The initial mean is drawn uniformly from [-4, 4]^d.
inline RunRecord run(bench::ObjectiveInstance& objective, const CmaParams& params, std::uint64_t budget, double target,
                     Rng& rng, double sigma0 = 2.0) {
  RunOptions opt;
  opt.budget = budget;
  opt.target = target;
  opt.sigma0 = sigma0;
  auto state = detail::initial_state(objective.dim(), sigma0, 0, rng);
  return detail::run_from(objective, params, std::move(state), opt, rng);
}

/// IPOP restarts: lambda doubles on every restart and all runs share one
/// evaluation budget.
inline std::vector<RunRecord> run_ipop(bench::ObjectiveInstance& objective, const CmaParams& base_params,
                                       std::uint64_t budget, double target, int max_restarts, Rng& rng,
                                       double sigma0 = 2.0) {
  require(max_restarts >= 0, ErrorCode::InvalidArgument, "max_restarts must be >= 0");
  std::vector<RunRecord> records;
  std::uint64_t used = 0;
  for (int r = 0; r <= max_restarts; ++r) {
    const int lambda = base_params.lambda << r;
    CmaParams params = r == 0 ? base_params : default_params(objective.dim(), lambda);
    params.hsig_correction = base_params.hsig_correction;
    if (used + static_cast<std::uint64_t>(lambda) > budget && r > 0) break;
    RunOptions opt;
    opt.budget = budget;
    opt.target = target;
    opt.sigma0 = sigma0;
    opt.restarts = r;
    opt.evaluations_used = used;
    auto state = detail::initial_state(objective.dim(), sigma0, r, rng);
    records.push_back(detail::run_from(objective, params, std::move(state), opt, rng));
    used += records.back().archive.size();
    if (records.back().termination != Termination::Stagnation) break;
  }
  return records;
}

/// Concatenates IPOP records into one record with a shared archive.
inline RunRecord merge_records(const std::vector<RunRecord>& records) {
  require(!records.empty(), ErrorCode::NoGenerations, "no records to merge");
  RunRecord out;
  for (const auto& r : records) {
    const std::size_t offset = out.archive.size();
    for (auto snap : r.generations) {
      snap.archive_begin += offset;
      snap.archive_end += offset;
      out.generations.push_back(std::move(snap));
    }
    out.archive.append(r.archive);
    out.covariance_repairs += r.covariance_repairs;
  }
  out.termination = records.back().termination;
  return out;
}

/// Smoothing weights over generations g-2..g+2, truncated at record and
/// restart boundaries and renormalized. Returns (generation index, weight).
inline std::vector<std::pair<std::size_t, double>> smoothing_weights(const RunRecord& record, std::size_t g) {
  require(!record.generations.empty(), ErrorCode::NoGenerations, "record has no generations");
  require(g < record.generations.size(), ErrorCode::InvalidArgument, "generation index out of range");
  static constexpr double kRaw[5] = {1.0, 2.0, 3.0, 2.0, 1.0};
  const long restart = record.generations[g].state.restarts;
  std::vector<std::pair<std::size_t, double>> w;
  double total = 0.0;
  for (int off = -2; off <= 2; ++off) {
    const long n = static_cast<long>(g) + off;
    if (n < 0 || n >= static_cast<long>(record.generations.size())) continue;
    if (record.generations[static_cast<std::size_t>(n)].state.restarts != restart) continue;
    w.emplace_back(static_cast<std::size_t>(n), kRaw[off + 2]);
    total += kRaw[off + 2];
  }
  for (auto& [n, v] : w) v /= total;
  return w;
}

/// Mixture mean and covariance of the smoothed distribution at generation g.
inline std::pair<Vector, Matrix> smoothed_distribution(const RunRecord& record, std::size_t g) {
  const auto w = smoothing_weights(record, g);
  const auto d = record.generations[g].state.dim();
  Vector m = Vector::Zero(d);
  Matrix c = Matrix::Zero(d, d);
  for (const auto& [n, wn] : w) {
    const auto& s = record.generations[n].state;
    m += wn * s.mean;
    c += wn * wn * (s.sigma * s.sigma) * s.cov;
  }
  return {m, 0.5 * (c + c.transpose())};
}

/// n draws from N(sum w_n m_n, sum w_n^2 sigma_n^2 C_n).
inline SampleSet smoothed_sample(const RunRecord& record, std::size_t g, std::size_t n, Rng& rng) {
  const auto [m, c] = smoothed_distribution(record, g);
  const Matrix root = linalg::SymmetricEigen(c).sqrt();
  SampleSet s;
  for (std::size_t i = 0; i < n; ++i) s.push_back(m + root * standard_normal(rng, m.size()), kMissing);
  return s;
}

}  // namespace elas::cma

#endif  // ELAS_CMAES_HPP
