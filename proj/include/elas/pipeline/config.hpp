#ifndef ELAS_PIPELINE_CONFIG_HPP
#define ELAS_PIPELINE_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "elas/analysis/robustness.hpp"
#include "elas/benchfns.hpp"
#include "elas/features/common.hpp"
#include "elas/models/training.hpp"
#include "elas/tss.hpp"

namespace elas::pipeline {

using json = nlohmann::json;

struct AnalysisConfig {
  double nanout_exclusion = 0.25;      // drop features NAN_OUT in more than this share of values
  double nanout_rate_for_n = 0.01;     // tolerated NAN_OUT rate when estimating N
  double robustness_threshold = 0.9;
  double robustness_delta = 0.05;
  analysis::LowPercentile low_percentile = analysis::LowPercentile::Interpolated;
  double cluster_threshold = 0.9;
  int cluster_runs = 5;
  int kmedoids_restarts = 5;
  double alpha = 0.05;
  std::uint64_t seed = 0;
};

/// Validation/test split over the levels of one categorical column, drawn
/// independently inside every stratum.
struct SplitSpec {
  std::string axis = "model";
  double validation_fraction = 0.125;  // 1 of 8 levels
  std::vector<std::string> stratify{"dim", "function", "instance"};
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  std::vector<int> dims{2, 3, 5, 10, 20};
  std::vector<std::string> functions{"sphere"};
  std::vector<std::uint64_t> instances{11, 12, 13, 14, 15};
  std::vector<std::uint64_t> seeds{1};
  int budget_per_dim = 250;
  double target = 1e-8;
  double sigma0 = 2.0;
  int ipop_restarts = 0;
  int generations_sampled = 100;
  int resamples = 100;
  std::optional<std::vector<long>> generation_filter;  // restricts sampled generations
  std::vector<tss::TssSpec> tss{tss::TssSpec::full(), {tss::Method::Knn, {}, {}, {}}, {tss::Method::Nearest, {}, {}, {}}};
  std::vector<models::ModelSettings> models;
  features::FeatureConfig features;
  AnalysisConfig analysis;
  SplitSpec split;
  std::uint64_t seed = 0;
  std::string out = "elas_out";

  ExperimentConfig() {
    models::ModelSettings lq;
    lq.family = models::Family::Lq;
    models::ModelSettings gp;
    gp.family = models::Family::Gp;
    gp.gp_cov = models::CovKind::SE;
    models = {lq, gp};
  }
};

namespace detail {

template <class T>
void read(const json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, std::string("bad value for '") + key + "': " + e.what());
  }
}

inline void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw Error(ErrorCode::Config, "unknown key '" + k + "' in " + where);
}

}  // namespace detail

/// Parses and validates a config; every field is optional.
inline ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::Config, "config must be a JSON object");
  detail::reject_unknown(j,
                         {"dims", "functions", "instances", "seeds", "budget_per_dim", "target", "sigma0",
                          "ipop_restarts", "generations_sampled", "resamples", "generation_filter", "tss", "models",
                          "features", "analysis", "split", "seed", "out"},
                         "config");
  ExperimentConfig c;
  detail::read(j, "dims", c.dims);
  detail::read(j, "functions", c.functions);
  detail::read(j, "instances", c.instances);
  detail::read(j, "seeds", c.seeds);
  detail::read(j, "budget_per_dim", c.budget_per_dim);
  detail::read(j, "target", c.target);
  detail::read(j, "sigma0", c.sigma0);
  detail::read(j, "ipop_restarts", c.ipop_restarts);
  detail::read(j, "generations_sampled", c.generations_sampled);
  detail::read(j, "resamples", c.resamples);
  detail::read(j, "seed", c.seed);
  detail::read(j, "out", c.out);
  if (j.contains("generation_filter")) {
    std::vector<long> g;
    detail::read(j, "generation_filter", g);
    c.generation_filter = g;
  }
  try {
    if (j.contains("tss")) {
      c.tss.clear();
      for (const auto& t : j.at("tss")) c.tss.push_back(tss::tss_from_json(t));
    }
    if (j.contains("models")) {
      c.models.clear();
      for (const auto& m : j.at("models")) c.models.push_back(models::settings_from_json(m));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, std::string("malformed tss/models entry: ") + e.what());
  }
  if (j.contains("features")) {
    const auto& f = j.at("features");
    detail::reject_unknown(f,
                           {"dispersion_quantiles", "ic_settling", "ic_partial_ratio", "ic_grid_points", "ic_log_lo",
                            "ic_log_hi", "levelset_quantiles", "levelset_folds", "kde_grid", "seed"},
                           "features");
    auto& fc = c.features;
    detail::read(f, "dispersion_quantiles", fc.dispersion_quantiles);
    detail::read(f, "ic_settling", fc.ic_settling);
    detail::read(f, "ic_partial_ratio", fc.ic_partial_ratio);
    detail::read(f, "ic_grid_points", fc.ic_grid_points);
    detail::read(f, "ic_log_lo", fc.ic_log_lo);
    detail::read(f, "ic_log_hi", fc.ic_log_hi);
    detail::read(f, "levelset_quantiles", fc.levelset_quantiles);
    detail::read(f, "levelset_folds", fc.levelset_folds);
    detail::read(f, "kde_grid", fc.kde_grid);
    detail::read(f, "seed", fc.seed);
  }
  if (j.contains("analysis")) {
    const auto& a = j.at("analysis");
    detail::reject_unknown(a,
                           {"nanout_exclusion", "nanout_rate_for_n", "robustness_threshold", "robustness_delta",
                            "low_percentile", "cluster_threshold", "cluster_runs", "kmedoids_restarts", "alpha", "seed"},
                           "analysis");
    auto& ac = c.analysis;
    detail::read(a, "nanout_exclusion", ac.nanout_exclusion);
    detail::read(a, "nanout_rate_for_n", ac.nanout_rate_for_n);
    detail::read(a, "robustness_threshold", ac.robustness_threshold);
    detail::read(a, "robustness_delta", ac.robustness_delta);
    detail::read(a, "cluster_threshold", ac.cluster_threshold);
    detail::read(a, "cluster_runs", ac.cluster_runs);
    detail::read(a, "kmedoids_restarts", ac.kmedoids_restarts);
    detail::read(a, "alpha", ac.alpha);
    detail::read(a, "seed", ac.seed);
    if (a.contains("low_percentile")) {
      const auto v = a.at("low_percentile").get<std::string>();
      if (v == "interpolated") ac.low_percentile = analysis::LowPercentile::Interpolated;
      else if (v == "minimum") ac.low_percentile = analysis::LowPercentile::Minimum;
      else throw Error(ErrorCode::Config, "low_percentile must be 'interpolated' or 'minimum'");
    }
  }
  if (j.contains("split")) {
    const auto& s = j.at("split");
    detail::reject_unknown(s, {"axis", "validation_fraction", "stratify", "seed"}, "split");
    detail::read(s, "axis", c.split.axis);
    detail::read(s, "validation_fraction", c.split.validation_fraction);
    detail::read(s, "stratify", c.split.stratify);
    detail::read(s, "seed", c.split.seed);
  }

  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::Config, what);
  };
  need(!c.dims.empty() && !c.functions.empty() && !c.instances.empty() && !c.seeds.empty(),
       "dims, functions, instances and seeds must be nonempty");
  need(!c.tss.empty() && !c.models.empty(), "tss and models must be nonempty");
  for (int d : c.dims) need(d >= 1, "dimensions must be >= 1");
  for (const auto& f : c.functions) bench::parse_base(f);  // throws on unknown names
  need(c.budget_per_dim >= 1, "budget_per_dim must be >= 1");
  need(c.target >= 0.0, "target must be >= 0");
  need(c.sigma0 > 0.0, "sigma0 must be positive");
  need(c.ipop_restarts >= 0, "ipop_restarts must be >= 0");
  need(c.generations_sampled >= 1 && c.resamples >= 1, "generations_sampled and resamples must be >= 1");
  need(c.features.ic_grid_points >= 1 && c.features.levelset_folds >= 2, "bad feature settings");
  need(c.split.validation_fraction > 0.0 && c.split.validation_fraction < 1.0, "validation_fraction must be in (0,1)");
  need(c.analysis.nanout_exclusion >= 0.0 && c.analysis.nanout_exclusion <= 1.0, "nanout_exclusion must be in [0,1]");
  return c;
}

inline json config_to_json(const ExperimentConfig& c) {
  json tss = json::array(), mods = json::array();
  for (const auto& t : c.tss) tss.push_back(tss::to_json(t));
  for (const auto& m : c.models) mods.push_back(models::to_json(m));
  json j{{"dims", c.dims},
         {"functions", c.functions},
         {"instances", c.instances},
         {"seeds", c.seeds},
         {"budget_per_dim", c.budget_per_dim},
         {"target", c.target},
         {"sigma0", c.sigma0},
         {"ipop_restarts", c.ipop_restarts},
         {"generations_sampled", c.generations_sampled},
         {"resamples", c.resamples},
         {"tss", tss},
         {"models", mods},
         {"seed", c.seed},
         {"out", c.out}};
  if (c.generation_filter) j["generation_filter"] = *c.generation_filter;
  const auto& f = c.features;
  j["features"] = {{"dispersion_quantiles", f.dispersion_quantiles}, {"ic_settling", f.ic_settling},
                   {"ic_partial_ratio", f.ic_partial_ratio},         {"ic_grid_points", f.ic_grid_points},
                   {"ic_log_lo", f.ic_log_lo},                       {"ic_log_hi", f.ic_log_hi},
                   {"levelset_quantiles", f.levelset_quantiles},     {"levelset_folds", f.levelset_folds},
                   {"kde_grid", f.kde_grid},                         {"seed", f.seed}};
  const auto& a = c.analysis;
  j["analysis"] = {{"nanout_exclusion", a.nanout_exclusion},
                   {"nanout_rate_for_n", a.nanout_rate_for_n},
                   {"robustness_threshold", a.robustness_threshold},
                   {"robustness_delta", a.robustness_delta},
                   {"low_percentile", a.low_percentile == analysis::LowPercentile::Minimum ? "minimum" : "interpolated"},
                   {"cluster_threshold", a.cluster_threshold},
                   {"cluster_runs", a.cluster_runs},
                   {"kmedoids_restarts", a.kmedoids_restarts},
                   {"alpha", a.alpha},
                   {"seed", a.seed}};
  j["split"] = {{"axis", c.split.axis},
                {"validation_fraction", c.split.validation_fraction},
                {"stratify", c.split.stratify},
                {"seed", c.split.seed}};
  return j;
}

}  // namespace elas::pipeline

#endif  // ELAS_PIPELINE_CONFIG_HPP
