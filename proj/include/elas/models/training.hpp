#ifndef ELAS_MODELS_TRAINING_HPP
#define ELAS_MODELS_TRAINING_HPP

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "elas/cmaes.hpp"
#include "elas/core/transform.hpp"
#include "elas/models/fit_result.hpp"
#include "elas/models/forest.hpp"
#include "elas/models/gp.hpp"
#include "elas/models/metrics.hpp"
#include "elas/models/polynomial.hpp"
#include "elas/tss.hpp"

namespace elas::models {

enum class Family { Lmm, Lq, Gp, Rf };

inline std::string to_string(Family f) {
  switch (f) {
    case Family::Lmm: return "lmm";
    case Family::Lq: return "lq";
    case Family::Gp: return "gp";
    case Family::Rf: return "rf";
  }
  return "?";
}

struct ModelSettings {
  Family family = Family::Lq;
  CovKind gp_cov = CovKind::SE;
  GpConfig gp;
  std::optional<std::string> rf_preset;
  ForestSettings rf;
  LqConfig lq;
  std::optional<int> lmm_k;
  std::uint64_t seed = 0;

  /// Short identifier, e.g. "gp-SE", "rf-CART_full_MSE", "lq".
  std::string name() const {
    switch (family) {
      case Family::Gp: return "gp-" + to_string(gp_cov);
      case Family::Rf: return "rf-" + rf_preset.value_or(rf.label);
      default: return to_string(family);
    }
  }
};

/// {family: lmm|lq|gp|rf, gp_cov?, rf_preset?, seed}
inline ModelSettings settings_from_json(const nlohmann::json& j) {
  ModelSettings s;
  const auto fam = j.at("family").get<std::string>();
  if (fam == "lmm") s.family = Family::Lmm;
  else if (fam == "lq") s.family = Family::Lq;
  else if (fam == "gp") s.family = Family::Gp;
  else if (fam == "rf") s.family = Family::Rf;
  else throw Error(ErrorCode::Config, "unknown model family '" + fam + "'");
  s.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("gp_cov")) s.gp_cov = parse_cov_kind(j["gp_cov"].get<std::string>());
  if (j.contains("gp_restarts")) s.gp.restarts = j["gp_restarts"].get<int>();
  if (j.contains("gp_max_evaluations")) s.gp.max_evaluations = j["gp_max_evaluations"].get<int>();
  if (j.contains("rf_preset")) {
    s.rf_preset = j["rf_preset"].get<std::string>();
    s.rf = forest_preset(*s.rf_preset);
  }
  if (j.contains("rf_average")) s.rf.average = j["rf_average"].get<bool>();
  if (j.contains("lmm_k")) s.lmm_k = j["lmm_k"].get<int>();
  if (j.contains("lq_tau")) s.lq.tau = j["lq_tau"].get<double>();
  s.gp.seed = s.seed;
  s.rf.seed = s.seed;
  return s;
}

inline nlohmann::json to_json(const ModelSettings& s) {
  nlohmann::json j{{"family", to_string(s.family)}, {"seed", s.seed}};
  if (s.family == Family::Gp) j["gp_cov"] = to_string(s.gp_cov);
  if (s.family == Family::Rf && s.rf_preset) j["rf_preset"] = *s.rf_preset;
  return j;
}

/// A trained surrogate predicting in the original input/output space.
class TrainedModel {
 public:
  using Inner = std::variant<PolyModel, LmmModel, GpModel, ForestModel>;

  TrainedModel(Inner inner, std::optional<TransformSpec> input_transform, TransformSpec output_transform)
      : inner_(std::move(inner)), input_(std::move(input_transform)), output_(std::move(output_transform)) {}

  double predict(const Point& x) const {
    const Point z = input_ ? input_->to_basis(x) : x;
    const double y = std::visit(
        [&](const auto& m) -> double {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, GpModel>) return m.predict_mean(z);
          else return m.predict(z);
        },
        inner_);
    return invert_transform_y(output_, y);
  }

  std::vector<double> predict(const std::vector<Point>& xs) const {
    std::vector<double> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.push_back(predict(x));
    return out;
  }

  const Inner& inner() const noexcept { return inner_; }
  bool inputs_transformed() const noexcept { return input_.has_value(); }

 private:
  Inner inner_;
  std::optional<TransformSpec> input_;
  TransformSpec output_;
};

/// Whether the sigma^2 C input transform is applied before fitting.
inline bool uses_input_transform(Family family, tss::Method method) {
  switch (family) {
    case Family::Lmm: return false;  // works in the sigma^2 C metric itself
    case Family::Lq: return method != tss::Method::Full;
    case Family::Gp: return true;
    case Family::Rf: return false;
  }
  return true;
}

/// Select, transform, normalise, fit, then reject models that are constant
/// on a fresh lambda-point population drawn from the CMA distribution.
/// `queries` are the points to be predicted (used by knn/nearest selection).
inline FitResult<TrainedModel> train_model(const SampleSet& archive, const tss::TssSpec& tss_spec,
                                           const ModelSettings& settings, const DistributionState& state,
                                           const std::vector<Point>& queries, int lambda, Rng& rng) {
  SampleSet selected;
  try {
    selected = tss::select(tss_spec, archive.known(), queries, state).known();
  } catch (const Error& e) {
    return NotTrained{std::string("training-set selection failed: ") + e.what()};
  }
  if (selected.empty()) return NotTrained{"empty training set"};

  const auto y_tr = selected.known_outputs();
  const TransformSpec full = make_transform(state, y_tr);
  const bool transform_inputs = uses_input_transform(settings.family, tss_spec.method);
  TransformSpec y_only = full;
  y_only.mean = Vector::Zero(state.dim());
  y_only.root_inv = Matrix::Identity(state.dim(), state.dim());
  const SampleSet train = apply_transform(transform_inputs ? full : y_only, selected);
  std::optional<TransformSpec> input;
  if (transform_inputs) input = full;

  std::optional<TrainedModel> model;
  switch (settings.family) {
    case Family::Lq: {
      auto m = train_lq(train, settings.lq);
      if (!m) return NotTrained{m.reason()};
      model.emplace(m.model(), input, full);
      break;
    }
    case Family::Lmm: {
      auto m = make_lmm(train, settings.lmm_k.value_or(lmm_default_k(state.dim())), state);
      if (!m) return NotTrained{m.reason()};
      model.emplace(m.model(), input, full);
      break;
    }
    case Family::Gp: {
      auto m = gp_fit(train, settings.gp_cov, settings.gp);
      if (!m) return NotTrained{m.reason()};
      model.emplace(m.model(), input, full);
      break;
    }
    case Family::Rf: {
      if (train.size() < 2) return NotTrained{"forest needs at least 2 points"};
      model.emplace(forest_train(train, settings.rf), input, full);
      break;
    }
  }

  cma::CmaParams pop_params;
  pop_params.lambda = lambda;
  const auto test_points = cma::sample_population(state, pop_params, rng);
  std::vector<double> preds;
  try {
    preds = model->predict(test_points);
  } catch (const Error& e) {
    return NotTrained{std::string("prediction failed: ") + e.what()};
  }
  for (double p : preds)
    if (!std::isfinite(p)) return NotTrained{"non-finite prediction"};
  const auto [pmin, pmax] = std::minmax_element(preds.begin(), preds.end());
  const auto [ymin, ymax] = std::minmax_element(y_tr.begin(), y_tr.end());
  const double y_range = *ymax - *ymin;
  const double threshold = std::min(1e-8, 0.05 * y_range);
  if (y_range <= 0.0 || *pmax - *pmin < threshold) return NotTrained{"model is constant"};
  return std::move(*model);
}

/// MSE and RDE of a trained model on an evaluated test population.
inline ErrorPair evaluate_errors(const FitResult<TrainedModel>& model, const SampleSet& test, int mu) {
  ErrorPair e;
  if (!model) {
    e.not_trained = true;
    e.reason = model.reason();
    return e;
  }
  const auto y = test.known_outputs();
  std::vector<double> y_hat;
  try {
    for (std::size_t i = 0; i < test.size(); ++i)
      if (test.outputs[i]) y_hat.push_back(model->predict(test.points[i]));
  } catch (const Error& err) {
    e.not_trained = true;
    e.reason = std::string("prediction failed: ") + err.what();
    return e;
  }
  for (double v : y_hat)
    if (!std::isfinite(v)) {
      e.not_trained = true;
      e.reason = "non-finite prediction";
      return e;
    }
  e.mse = mse(y, y_hat);
  e.rde = rde(y, y_hat, std::min<int>(mu, static_cast<int>(y.size())));
  return e;
}

}  // namespace elas::models

#endif  // ELAS_MODELS_TRAINING_HPP
