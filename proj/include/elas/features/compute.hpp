#ifndef ELAS_FEATURES_COMPUTE_HPP
#define ELAS_FEATURES_COMPUTE_HPP

#include <iterator>
#include <string>
#include <utility>
#include <vector>

#include "elas/core/random.hpp"
#include "elas/features/basic.hpp"
#include "elas/features/cma.hpp"
#include "elas/features/dispersion.hpp"
#include "elas/features/info_content.hpp"
#include "elas/features/levelset.hpp"
#include "elas/features/metamodel.hpp"
#include "elas/features/nbc.hpp"
#include "elas/features/ydist.hpp"

namespace elas::features {

/// Archive A, training set T, and their unions with the population P.
enum class SetBase { A = 0, T = 1, AP = 2, TP = 3 };

inline std::string to_string(SetBase b) {
  switch (b) {
    case SetBase::A: return "A";
    case SetBase::T: return "T";
    case SetBase::AP: return "AP";
    case SetBase::TP: return "TP";
  }
  return "?";
}

inline bool has_population(SetBase b) { return b == SetBase::AP || b == SetBase::TP; }

struct FeatureContext {
  SetBase base = SetBase::A;
  bool transformed = false;
  DistributionState state;  // expressed in the basis of `set`
  SampleSet set;
};

struct FeatureRow {
  std::string set_variant;
  bool transformed = false;
  std::string feature_name;
  double value = kNanOut;
};

inline SampleSet with_population(const SampleSet& s, const std::vector<Point>& population) {
  SampleSet out = s;
  for (const auto& x : population) out.push_back(x, kMissing);
  return out;
}

/// Plain and sigma^2 C transformed variants of `set` and of `set` plus the
/// population.
inline std::vector<FeatureContext> contexts_for(SetBase base, const DistributionState& state, const SampleSet& set,
                                                const std::vector<Point>& population) {
  const SetBase with_p = base == SetBase::A ? SetBase::AP : SetBase::TP;
  const TransformSpec t = make_input_transform(state);
  const DistributionState t_state = transform_state(t, state);
  std::vector<FeatureContext> out;
  for (const auto& [b, s] : {std::pair{base, set}, std::pair{with_p, with_population(set, population)}}) {
    out.push_back({b, false, state, s});
    out.push_back({b, true, t_state, apply_transform(t, s)});
  }
  return out;
}

/// The sample-set variants of one generation: 4 when the training set is
/// the whole archive (T would duplicate A), 8 otherwise.
inline std::vector<FeatureContext> make_contexts(const DistributionState& state, const SampleSet& archive,
                                                 const SampleSet& training, const std::vector<Point>& population,
                                                 bool training_is_archive) {
  auto out = contexts_for(SetBase::A, state, archive, population);
  if (!training_is_archive) {
    auto t = contexts_for(SetBase::T, state, training, population);
    out.insert(out.end(), std::make_move_iterator(t.begin()), std::make_move_iterator(t.end()));
  }
  return out;
}

/// Every feature on every context. Sample-set independent features (dim and
/// the CMA state) are attached to the untransformed A context only.
inline std::vector<FeatureRow> compute_all(const std::vector<FeatureContext>& contexts, const FeatureConfig& cfg = {}) {
  std::vector<FeatureRow> rows;
  const Metric euclid = Metric::euclidean();
  for (const auto& ctx : contexts) {
    const auto variant = to_string(ctx.base);
    auto emit = [&](const FeatureList& fl) {
      for (const auto& f : fl) rows.push_back({variant, ctx.transformed, f.name, f.value});
    };
    const bool plain_a = ctx.base == SetBase::A && !ctx.transformed;
    if (plain_a) {
      emit({dim_feature(ctx.state.dim())});
      emit(cma_state_features(ctx.state));
    }
    if (!ctx.transformed) emit({obs_feature(ctx.set)});
    emit(cma_set_features(ctx.state, ctx.set));
    emit(dispersion_features(ctx.set, euclid, cfg.dispersion_quantiles));
    // the tour and folds depend on the base set only, so both bases see the same walk
    const auto seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(ctx.base));
    emit(info_content_features(ctx.set, euclid, cfg, seed));
    emit(levelset_features(ctx.set, cfg, seed));
    if (!has_population(ctx.base)) {
      emit(metamodel_features(ctx.set));
      emit(nbc_features(ctx.set, euclid));
      if (!ctx.transformed) emit(ydist_features(ctx.set.known_outputs(), cfg));
    }
  }
  return rows;
}

}  // namespace elas::features

#endif  // ELAS_FEATURES_COMPUTE_HPP
