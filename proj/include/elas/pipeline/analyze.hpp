#ifndef ELAS_PIPELINE_ANALYZE_HPP
#define ELAS_PIPELINE_ANALYZE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "elas/analysis/cluster.hpp"
#include "elas/analysis/correlation.hpp"
#include "elas/analysis/hypothesis.hpp"
#include "elas/analysis/robustness.hpp"
#include "elas/features/normalization.hpp"
#include "elas/pipeline/commands.hpp"

namespace elas::pipeline {

/// One (run, generation) pair: the unit on which features and errors meet.
struct CaseKey {
  std::string run_id;
  std::size_t generation = 0;

  auto operator<=>(const CaseKey&) const = default;
  std::string str() const { return run_id + "/g" + std::to_string(generation); }
};

inline std::string feature_id(const std::string& name, const std::string& variant, bool transformed) {
  return name + "@" + variant + (transformed ? "_t" : "");
}

/// Feature values of one selection method, grouped by feature and case.
struct FeatureSamples {
  std::vector<std::string> features;  // sorted ids
  std::vector<CaseKey> cases;         // sorted
  // [feature][case]: one value per resample, NaN for NAN_OUT
  std::vector<std::vector<std::vector<double>>> values;
  // [feature][case]: sample size behind each value (obs of the untransformed variant)
  std::vector<std::vector<std::vector<std::size_t>>> points;
};

/// Parses feature CSVs (one or more files of the same selection method).
inline FeatureSamples parse_feature_tables(const std::vector<std::string>& texts) {
  using ObsKey = std::tuple<CaseKey, int, std::string>;
  std::map<std::string, std::map<CaseKey, std::map<int, std::pair<double, std::string>>>> raw;
  std::map<ObsKey, std::size_t> obs;
  for (const auto& text : texts) {
    const auto t = Table::parse(text);
    const auto c_run = t.column("run_id"), c_gen = t.column("generation"), c_res = t.column("resample"),
               c_var = t.column("set_variant"), c_tr = t.column("transformed"), c_name = t.column("feature_name"),
               c_val = t.column("value");
    for (const auto& r : t.rows) {
      const CaseKey key{r[c_run], static_cast<std::size_t>(std::stoul(r[c_gen]))};
      const int res = std::stoi(r[c_res]);
      const bool tr = r[c_tr] == "1";
      const double v = parse_feature(r[c_val]);
      if (r[c_name] == "basic.obs" && !tr) obs[{key, res, r[c_var]}] = std::isfinite(v) ? static_cast<std::size_t>(v) : 0;
      auto& slot = raw[feature_id(r[c_name], r[c_var], tr)][key];
      if (!slot.emplace(res, std::pair{v, r[c_var]}).second)
        throw Error(ErrorCode::InvalidArgument,
                    "duplicate feature value for " + r[c_name] + " in " + key.str() + " resample " + r[c_res]);
    }
  }
  FeatureSamples s;
  std::set<CaseKey> cases;
  for (const auto& [f, by_case] : raw)
    for (const auto& [c, _] : by_case) cases.insert(c);
  s.cases.assign(cases.begin(), cases.end());
  for (const auto& [f, by_case] : raw) {
    s.features.push_back(f);
    auto& vals = s.values.emplace_back(s.cases.size());
    auto& pts = s.points.emplace_back(s.cases.size());
    for (std::size_t c = 0; c < s.cases.size(); ++c) {
      const auto it = by_case.find(s.cases[c]);
      if (it == by_case.end()) continue;
      for (const auto& [res, vv] : it->second) {
        vals[c].push_back(vv.first);
        const auto o = obs.find({s.cases[c], res, vv.second});
        pts[c].push_back(o == obs.end() ? 0 : o->second);
      }
    }
  }
  return s;
}

/// Median over resamples, ignoring NAN_OUT; NaN when nothing is left.
inline double case_median(const std::vector<double>& v) {
  std::vector<double> x;
  for (double a : v)
    if (!std::isnan(a)) x.push_back(a);
  if (x.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(x.begin(), x.end());
  const auto m = x.size() / 2;
  if (x.size() % 2) return x[m];
  return x[m - 1] == x[m] ? x[m] : 0.5 * (x[m - 1] + x[m]);
}

inline std::vector<double> case_medians(const FeatureSamples& s, std::size_t f) {
  std::vector<double> out;
  for (const auto& v : s.values[f]) out.push_back(case_median(v));
  return out;
}

struct FeatureReportRow {
  std::string feature;
  double nan_rate = 0.0;
  bool excluded = false;
  std::optional<std::size_t> n_nanout;
  std::optional<features::NormalizationSpec> normalization;
  std::optional<analysis::TestResult> dim_test;
  double dim_p_holm = std::numeric_limits<double>::quiet_NaN();
  bool dim_dependent = false;
  double robustness = std::numeric_limits<double>::quiet_NaN();
  bool retained = false;
};

/// Friedman test of one feature's case medians with dimensions as
/// treatments. Blocks are (function, instance, seed, k-th generation of the
/// run); only blocks with a finite-or-infinite median for every dimension count.
inline std::optional<analysis::TestResult> dimension_test(const FeatureSamples& s, std::size_t f,
                                                          const std::map<std::string, RunKey>& runs) {
  // generation rank inside each run
  std::map<std::string, std::vector<std::size_t>> gens;
  for (const auto& c : s.cases) gens[c.run_id].push_back(c.generation);
  std::set<int> dims;
  std::map<std::tuple<std::string, std::uint64_t, std::uint64_t, std::size_t>, std::map<int, double>> blocks;
  const auto med = case_medians(s, f);
  for (std::size_t c = 0; c < s.cases.size(); ++c) {
    const auto it = runs.find(s.cases[c].run_id);
    if (it == runs.end()) throw Error(ErrorCode::InvalidArgument, "unknown run " + s.cases[c].run_id);
    const auto& key = it->second;
    const auto& g = gens[key.id()];
    const auto k = static_cast<std::size_t>(std::find(g.begin(), g.end(), s.cases[c].generation) - g.begin());
    dims.insert(key.dim);
    blocks[{key.function, key.instance, key.seed, k}][key.dim] = med[c];
  }
  if (dims.size() < 2) return std::nullopt;
  std::vector<std::vector<double>> rows;
  for (const auto& [_, by_dim] : blocks) {
    if (by_dim.size() != dims.size()) continue;
    std::vector<double> row;
    for (const auto& [d, v] : by_dim) row.push_back(v);
    if (std::none_of(row.begin(), row.end(), [](double v) { return std::isnan(v); })) rows.push_back(std::move(row));
  }
  if (rows.size() < 2) return std::nullopt;
  return analysis::friedman_test(rows);
}

/// NAN_OUT exclusion, N estimate, normalization, dimension screen and
/// robustness for every feature of one selection method.
inline std::vector<FeatureReportRow> screen_features(const FeatureSamples& s, const AnalysisConfig& cfg,
                                                     const std::map<std::string, RunKey>& runs) {
  std::vector<FeatureReportRow> report;
  for (std::size_t f = 0; f < s.features.size(); ++f) {
    FeatureReportRow row;
    row.feature = s.features[f];
    std::vector<double> all;
    std::vector<analysis::PointCountCase> counts;
    for (std::size_t c = 0; c < s.cases.size(); ++c)
      for (std::size_t i = 0; i < s.values[f][c].size(); ++i) {
        all.push_back(s.values[f][c][i]);
        counts.push_back({s.points[f][c][i], std::isnan(s.values[f][c][i])});
      }
    row.nan_rate = all.empty() ? 1.0 : analysis::nan_rate(all);
    row.excluded = row.nan_rate > cfg.nanout_exclusion;
    if (!counts.empty()) row.n_nanout = analysis::estimate_n_nanout(counts, cfg.nanout_rate_for_n);
    if (row.nan_rate < 1.0) row.normalization = features::NormalizationSpec::fit(all);
    if (!row.excluded) row.dim_test = dimension_test(s, f, runs);
    std::vector<std::vector<double>> groups;
    for (const auto& g : s.values[f])
      if (!g.empty()) groups.push_back(g);
    if (!groups.empty())
      row.robustness = analysis::robustness(groups, {cfg.robustness_delta, cfg.low_percentile});
    row.retained = !row.excluded && row.robustness >= cfg.robustness_threshold;
    report.push_back(std::move(row));
  }

  std::vector<double> p;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < report.size(); ++i)
    if (report[i].dim_test) {
      p.push_back(report[i].dim_test->p);
      idx.push_back(i);
    }
  const auto holm = analysis::holm_correction(p, cfg.alpha);
  for (std::size_t j = 0; j < idx.size(); ++j) {
    report[idx[j]].dim_p_holm = holm.adjusted[j];
    report[idx[j]].dim_dependent = holm.reject[j];
  }
  return report;
}

struct FeatureClusters {
  std::vector<std::string> features;   // retained features, clustered
  int k_hierarchical = 0;
  analysis::ClusterResult medoids;
  std::vector<std::vector<double>> medians;  // per feature, per case
};

/// Hierarchical cut for k, then k-medoids, on the Schweizer-Wolff
/// similarity of the retained features' case medians.
inline FeatureClusters cluster_features(const FeatureSamples& s, const std::vector<FeatureReportRow>& report,
                                        const AnalysisConfig& cfg, std::uint64_t seed) {
  FeatureClusters out;
  for (std::size_t f = 0; f < report.size(); ++f)
    if (report[f].retained) {
      out.features.push_back(s.features[f]);
      out.medians.push_back(case_medians(s, f));
    }
  if (out.features.empty()) return out;
  const Matrix sim = analysis::sw_matrix(out.medians);
  Rng rng(seed);
  out.k_hierarchical = analysis::hierarchical_cluster_count(sim, cfg.cluster_threshold, cfg.cluster_runs, rng);
  out.medoids = analysis::k_medoids(sim, out.k_hierarchical, rng, cfg.kmedoids_restarts);
  return out;
}

// ---------------------------------------------------------------- errors

/// Error values of every (model, selection) combination over shared cases.
struct ErrorMatrix {
  std::vector<std::string> combos;  // "model:tss", first appearance order
  std::vector<std::string> combo_tss;
  std::vector<CaseKey> cases;       // sorted
  std::vector<std::vector<std::optional<double>>> values;  // [combo][case]
};

inline ErrorMatrix error_matrix(const Table& t, const std::string& measure) {
  const auto c_run = t.column("run_id"), c_gen = t.column("generation"), c_tss = t.column("tss"),
             c_model = t.column("model"), c_val = t.column(measure);
  ErrorMatrix m;
  std::map<std::string, std::size_t> combo_index;
  std::set<CaseKey> cases;
  std::map<std::pair<std::size_t, CaseKey>, std::optional<double>> cell;
  for (const auto& r : t.rows) {
    const auto combo = r[c_model] + ":" + r[c_tss];
    auto [it, fresh] = combo_index.emplace(combo, m.combos.size());
    if (fresh) {
      m.combos.push_back(combo);
      m.combo_tss.push_back(r[c_tss]);
    }
    const CaseKey key{r[c_run], static_cast<std::size_t>(std::stoul(r[c_gen]))};
    cases.insert(key);
    std::optional<double> v;
    if (r[c_val] != "missing" && !r[c_val].empty()) v = io::parse_double(r[c_val]);
    if (!cell.emplace(std::pair{it->second, key}, v).second)
      throw Error(ErrorCode::InvalidArgument, "duplicate error row for " + combo + " in " + key.str());
  }
  m.cases.assign(cases.begin(), cases.end());
  m.values.assign(m.combos.size(), std::vector<std::optional<double>>(m.cases.size()));
  for (std::size_t c = 0; c < m.cases.size(); ++c)
    for (std::size_t k = 0; k < m.combos.size(); ++k) {
      const auto it = cell.find({k, m.cases[c]});
      if (it != cell.end()) m.values[k][c] = it->second;
    }
  return m;
}

/// Index of the combination with the lowest error per case (first on ties).
inline std::vector<std::optional<std::size_t>> best_combos(const ErrorMatrix& m) {
  std::vector<std::optional<std::size_t>> best(m.cases.size());
  for (std::size_t c = 0; c < m.cases.size(); ++c)
    for (std::size_t k = 0; k < m.combos.size(); ++k) {
      const auto& v = m.values[k][c];
      if (v && !std::isnan(*v) && (!best[c] || *v < *m.values[*best[c]][c])) best[c] = k;
    }
  return best;
}

struct KsRow {
  std::string combo;
  std::string feature;
  std::size_t n_all = 0;
  std::size_t n_best = 0;
  analysis::TestResult test{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  double p_holm = std::numeric_limits<double>::quiet_NaN();
  bool reject = false;
};

/// KS of each medoid feature: all cases against the cases where a
/// combination of this selection method had the lowest error.
inline std::vector<KsRow> ks_tests(const ErrorMatrix& m, const std::string& tss, const FeatureSamples& s,
                                   const FeatureClusters& cl, double alpha) {
  const auto best = best_combos(m);
  std::vector<KsRow> rows;
  for (std::size_t k = 0; k < m.combos.size(); ++k) {
    if (m.combo_tss[k] != tss) continue;
    for (auto med : cl.medoids.medoids) {
      const auto& name = cl.features[med];
      const auto& values = cl.medians[med];
      std::vector<double> all, sub;
      for (std::size_t c = 0; c < m.cases.size(); ++c) {
        if (!best[c]) continue;
        const auto pos = std::lower_bound(s.cases.begin(), s.cases.end(), m.cases[c]) - s.cases.begin();
        const double v = values[static_cast<std::size_t>(pos)];
        if (std::isnan(v)) continue;
        all.push_back(v);
        if (*best[c] == k) sub.push_back(v);
      }
      KsRow row{m.combos[k], name, all.size(), sub.size()};
      if (!sub.empty()) row.test = analysis::ks_two_sample(all, sub);
      rows.push_back(std::move(row));
    }
  }
  std::vector<double> p;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (!std::isnan(rows[i].test.p)) {
      p.push_back(rows[i].test.p);
      idx.push_back(i);
    }
  const auto holm = analysis::holm_correction(p, alpha);
  for (std::size_t j = 0; j < idx.size(); ++j) {
    rows[idx[j]].p_holm = holm.adjusted[j];
    rows[idx[j]].reject = holm.reject[j];
  }
  return rows;
}

struct WinsReport {
  std::vector<std::vector<double>> wins;
  std::vector<std::vector<double>> p_holm;  // symmetric; NaN where untestable
  std::vector<std::vector<bool>> reject;
  std::optional<analysis::TestResult> friedman;
};

/// Win percentages plus Holm-corrected Wilcoxon tests over all pairs, and a
/// Friedman test over the cases where every combination has an error.
inline WinsReport compare_combos(const ErrorMatrix& m, double alpha) {
  const auto n = m.combos.size();
  WinsReport r;
  r.wins = analysis::pairwise_wins(m.values);
  r.p_holm.assign(n, std::vector<double>(n, std::numeric_limits<double>::quiet_NaN()));
  r.reject.assign(n, std::vector<bool>(n, false));
  std::vector<double> p;
  std::vector<std::pair<std::size_t, std::size_t>> idx;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      std::vector<double> diffs;
      for (std::size_t c = 0; c < m.cases.size(); ++c) {
        const auto &a = m.values[i][c], &b = m.values[j][c];
        if (a && b && !std::isnan(*a) && !std::isnan(*b)) diffs.push_back(*a - *b);
      }
      try {
        p.push_back(analysis::wilcoxon_signed_rank(diffs).p);
        idx.push_back({i, j});
      } catch (const Error&) {
        // too few informative pairs
      }
    }
  const auto holm = analysis::holm_correction(p, alpha);
  for (std::size_t q = 0; q < idx.size(); ++q) {
    const auto [i, j] = idx[q];
    r.p_holm[i][j] = r.p_holm[j][i] = holm.adjusted[q];
    r.reject[i][j] = r.reject[j][i] = holm.reject[q];
  }
  std::vector<std::vector<double>> blocks;
  for (std::size_t c = 0; c < m.cases.size(); ++c) {
    std::vector<double> b;
    for (std::size_t k = 0; k < n; ++k)
      if (m.values[k][c] && !std::isnan(*m.values[k][c])) b.push_back(*m.values[k][c]);
    if (b.size() == n) blocks.push_back(std::move(b));
  }
  if (n >= 2 && blocks.size() >= 2) r.friedman = analysis::friedman_test(blocks);
  return r;
}

// ---------------------------------------------------------------- command

namespace detail {
inline std::string num(double v) { return std::isnan(v) ? "NA" : io::format_double(v); }
inline json num_json(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}
}  // namespace detail

inline fs::path analysis_dir(const fs::path& out) { return out / "analysis"; }

inline std::string feature_report_csv(const std::vector<FeatureReportRow>& rows) {
  Table t;
  t.header = {"feature",  "nan_rate", "excluded",        "n_nanout",       "dim_statistic", "dim_p",
              "dim_p_holm", "dim_dependent", "robustness", "retained"};
  for (const auto& r : rows)
    t.rows.push_back({r.feature, detail::num(r.nan_rate), r.excluded ? "1" : "0",
                      r.n_nanout ? std::to_string(*r.n_nanout) : "not_reached",
                      detail::num(r.dim_test ? r.dim_test->statistic : std::nan("")),
                      detail::num(r.dim_test ? r.dim_test->p : std::nan("")), detail::num(r.dim_p_holm),
                      r.dim_dependent ? "1" : "0", detail::num(r.robustness), r.retained ? "1" : "0"});
  return t.to_csv();
}

/// Full analysis over feature files and the error table. Uses the test part
/// of a split when one exists.
inline StageResult cmd_analyze(const ExperimentConfig& cfg, const fs::path& out) {
  const auto split_test = split_dir(out) / "test.csv";
  const bool use_split = fs::exists(split_test);
  const auto error_file = use_split ? split_test : errors_path(out);
  if (!fs::exists(error_file)) throw Error(ErrorCode::Io, "no error table at " + error_file.string());
  const auto errors = Table::parse(io::read_file(error_file));

  std::map<std::string, RunKey> runs;
  for (const auto& k : enumerate_runs(cfg)) runs.emplace(k.id(), k);
  const std::vector<std::string> measures{"mse", "rde"};
  std::map<std::string, ErrorMatrix> matrices;
  for (const auto& m : measures) matrices.emplace(m, error_matrix(errors, m));
  for (const auto& c : matrices.at("mse").cases)
    if (!runs.count(c.run_id))
      throw Error(ErrorCode::InvalidArgument, "inconsistent keys: error table run " + c.run_id + " not in config");

  json summary{{"error_table", fs::relative(error_file, out).generic_string()}, {"tss", json::object()}};
  const auto dir = analysis_dir(out);
  for (const auto& spec : cfg.tss) {
    const auto label = tss_label(spec);
    std::vector<std::string> texts;
    for (const auto& [id, key] : runs) {
      const auto path = features_path(out, label, key);
      if (!fs::exists(path)) throw Error(ErrorCode::Io, "missing feature file " + path.string());
      texts.push_back(io::read_file(path));
    }
    const auto samples = parse_feature_tables(texts);
    for (const auto& c : matrices.at("mse").cases)
      if (matrices.at("mse").combos.size() && !std::binary_search(samples.cases.begin(), samples.cases.end(), c))
        throw Error(ErrorCode::InvalidArgument, "inconsistent keys: no " + label + " features for " + c.str());

    const auto report = screen_features(samples, cfg.analysis, runs);
    const auto clusters = cluster_features(samples, report, cfg.analysis, derive_seed(cfg.analysis.seed, fnv1a(label)));

    const auto tdir = dir / label;
    io::atomic_write(tdir / "feature_report.csv", feature_report_csv(report));
    json norm = json::object();
    for (const auto& r : report) norm[r.feature] = r.normalization ? json(*r.normalization) : json(nullptr);
    io::atomic_write(tdir / "normalization.json", norm.dump(2) + "\n");

    Table ct;
    ct.header = {"feature", "cluster", "medoid"};
    for (std::size_t i = 0; i < clusters.features.size(); ++i) {
      const auto lab = clusters.medoids.labels[i];
      ct.rows.push_back({clusters.features[i], std::to_string(lab),
                         clusters.medoids.medoids[static_cast<std::size_t>(lab)] == i ? "1" : "0"});
    }
    io::atomic_write(tdir / "clusters.csv", ct.to_csv());

    for (const auto& m : measures) {
      Table kt;
      kt.header = {"combination", "feature", "n_all", "n_best", "statistic", "p", "p_holm", "reject"};
      for (const auto& r : ks_tests(matrices.at(m), label, samples, clusters, cfg.analysis.alpha))
        kt.rows.push_back({r.combo, r.feature, std::to_string(r.n_all), std::to_string(r.n_best),
                           detail::num(r.test.statistic), detail::num(r.test.p), detail::num(r.p_holm),
                           r.reject ? "1" : "0"});
      io::atomic_write(tdir / ("ks_" + m + ".csv"), kt.to_csv());
    }

    std::size_t excluded = 0, retained = 0, dim_dep = 0;
    for (const auto& r : report) {
      excluded += r.excluded;
      retained += r.retained;
      dim_dep += r.dim_dependent;
    }
    json medoids = json::array();
    for (auto i : clusters.medoids.medoids) medoids.push_back(clusters.features[i]);
    summary["tss"][label] = {{"features", report.size()},         {"excluded", excluded},
                             {"dimension_dependent", dim_dep},     {"retained", retained},
                             {"clusters", clusters.k_hierarchical}, {"medoids", medoids}};
  }

  for (const auto& m : measures) {
    const auto& em = matrices.at(m);
    const auto cmp = compare_combos(em, cfg.analysis.alpha);
    Table wt;
    wt.header = {"row", "column", "wins_percent", "p_holm", "significant"};
    for (std::size_t i = 0; i < em.combos.size(); ++i)
      for (std::size_t j = 0; j < em.combos.size(); ++j)
        if (i != j)
          wt.rows.push_back({em.combos[i], em.combos[j], detail::num(cmp.wins[i][j]), detail::num(cmp.p_holm[i][j]),
                             cmp.reject[i][j] ? "1" : "0"});
    io::atomic_write(dir / ("wins_" + m + ".csv"), wt.to_csv());
    summary["friedman_" + m] = cmp.friedman ? json{{"statistic", detail::num_json(cmp.friedman->statistic)},
                                                   {"p", detail::num_json(cmp.friedman->p)}}
                                            : json(nullptr);
  }
  io::atomic_write(dir / "summary.json", summary.dump(2) + "\n");
  return {"analyze", {}};
}

}  // namespace elas::pipeline

#endif  // ELAS_PIPELINE_ANALYZE_HPP
