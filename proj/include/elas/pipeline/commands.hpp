#ifndef ELAS_PIPELINE_COMMANDS_HPP
#define ELAS_PIPELINE_COMMANDS_HPP

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "elas/cmaes.hpp"
#include "elas/features/compute.hpp"
#include "elas/models/training.hpp"
#include "elas/pipeline/config.hpp"
#include "elas/pipeline/parallel.hpp"
#include "elas/pipeline/store.hpp"
#include "elas/pipeline/table.hpp"
#include "elas/tss.hpp"

namespace elas::pipeline {

/// Outcome of a stage: per-task failures (empty on full success).
struct StageResult {
  std::string stage;
  std::vector<Failure> failures;

  bool ok() const { return failures.empty(); }
};

inline fs::path failure_manifest_path(const fs::path& out) { return out / "failures.json"; }

/// Writes the failure manifest when a stage had failures and removes a stale
/// one otherwise.
inline void record_failures(const fs::path& out, const StageResult& r) {
  const auto path = failure_manifest_path(out);
  if (r.ok()) {
    std::error_code ec;
    fs::remove(path, ec);
    return;
  }
  io::atomic_write(path, failures_to_json(r.stage, r.failures).dump(2) + "\n");
}

inline std::uint64_t resample_seed(std::uint64_t run_seed_value, std::size_t g, int i) {
  return derive_seed(derive_seed(run_seed_value, 0x72657361ull + g), static_cast<std::uint64_t>(i));
}

// ---------------------------------------------------------------- generate

/// One CMA-ES run per (dim, function, instance, seed), stored with its
/// sampled generations and their resampled archives.
inline StageResult cmd_generate(const ExperimentConfig& cfg, const fs::path& out) {
  const auto runs = enumerate_runs(cfg);
  StageResult result{"generate", {}};
  result.failures = parallel_for(
      runs.size(),
      [&](std::size_t r) {
        const auto& key = runs[r];
        auto objective = make_objective(key);
        const auto seed = run_seed(cfg, key);
        Rng rng(seed);
        const auto params = cma::default_params(key.dim);
        const auto budget = static_cast<std::uint64_t>(cfg.budget_per_dim) * static_cast<std::uint64_t>(key.dim);
        StoredRun run;
        run.key = key;
        if (cfg.ipop_restarts > 0)
          run.record = cma::merge_records(
              cma::run_ipop(objective, params, budget, cfg.target, cfg.ipop_restarts, rng, cfg.sigma0));
        else
          run.record = cma::run(objective, params, budget, cfg.target, rng, cfg.sigma0);
        run.sampled = sample_generations(run.record.generations.size(), cfg.generations_sampled, seed);
        for (auto g : run.sampled)
          for (int i = 0; i < cfg.resamples; ++i) {
            const auto rs = draw_resample(run.record, g, objective, resample_seed(seed, g, i));
            io::atomic_write(resample_path(out, key, g, i), resample_to_csv(rs, key.dim));
          }
        write_run(out, run);
      },
      [&](std::size_t r) { return runs[r].id(); });
  io::atomic_write(store_dir(out) / "config.json", config_to_json(cfg).dump(2) + "\n");
  return result;
}

/// Loads every stored run; a missing store directory is fatal, a missing run
/// is reported as a failure.
inline std::vector<StoredRun> load_runs(const ExperimentConfig& cfg, const fs::path& out,
                                        std::vector<Failure>& failures) {
  if (!fs::is_directory(store_dir(out)))
    throw Error(ErrorCode::Io, "no run store under " + out.string() + "; run generate first");
  std::vector<StoredRun> runs;
  for (const auto& key : enumerate_runs(cfg)) {
    try {
      runs.push_back(read_run(out, key));
    } catch (const std::exception& e) {
      failures.push_back({key.id(), e.what()});
    }
  }
  return runs;
}

// ---------------------------------------------------------------- features

inline const std::string& features_header() {
  static const std::string h = "run_id,generation,resample,set_variant,transformed,feature_name,value\n";
  return h;
}

inline fs::path features_path(const fs::path& out, const std::string& tss, const RunKey& key) {
  return out / "features" / tss / (key.id() + ".csv");
}

/// Feature rows of every resample of every selected generation, one file per
/// (selection method, run).
inline StageResult cmd_features(const ExperimentConfig& cfg, const fs::path& out) {
  StageResult result{"features", {}};
  const auto runs = load_runs(cfg, out, result.failures);

  struct Task {
    std::size_t run;
    std::size_t gen;
    int resample;
  };
  std::vector<Task> tasks;
  for (std::size_t r = 0; r < runs.size(); ++r)
    for (auto g : selected_generations(runs[r], cfg))
      for (int i = 0; i < cfg.resamples; ++i) tasks.push_back({r, g, i});

  // text[task][tss] holds the CSV lines of that task
  std::vector<std::vector<std::string>> text(tasks.size(), std::vector<std::string>(cfg.tss.size()));
  auto failures = parallel_for(
      tasks.size(),
      [&](std::size_t k) {
        const auto& t = tasks[k];
        const auto& run = runs[t.run];
        const auto& state = run.record.generations[t.gen].state;
        const auto rs = resample_from_csv(io::read_file(resample_path(out, run.key, t.gen, t.resample)));
        const auto& pop = rs.population.points;
        features::FeatureConfig fcfg = cfg.features;
        fcfg.seed = derive_seed(cfg.features.seed, fnv1a(run.key.id() + "/" + std::to_string(t.gen) + "/" +
                                                          std::to_string(t.resample)));
        const std::string prefix = run.key.id() + "," + std::to_string(t.gen) + "," + std::to_string(t.resample) + ",";
        auto lines = [&](const std::vector<features::FeatureRow>& rows) {
          std::string s;
          for (const auto& row : rows)
            s += prefix + row.set_variant + "," + (row.transformed ? "1" : "0") + "," + row.feature_name + "," +
                 format_feature(row.value) + "\n";
          return s;
        };
        const std::string a_lines =
            lines(features::compute_all(features::contexts_for(features::SetBase::A, state, rs.archive, pop), fcfg));
        for (std::size_t s = 0; s < cfg.tss.size(); ++s) {
          text[k][s] = a_lines;
          if (cfg.tss[s].method == tss::Method::Full) continue;
          SampleSet training;
          try {
            training = tss::select(cfg.tss[s], rs.archive.known(), pop, state);
          } catch (const Error&) {
            // an empty selection still yields rows, all NAN_OUT where undefined
          }
          text[k][s] += lines(
              features::compute_all(features::contexts_for(features::SetBase::T, state, training, pop), fcfg));
        }
      },
      [&](std::size_t k) {
        return runs[tasks[k].run].key.id() + "/g" + std::to_string(tasks[k].gen) + "/r" +
               std::to_string(tasks[k].resample);
      });
  result.failures.insert(result.failures.end(), failures.begin(), failures.end());

  for (std::size_t s = 0; s < cfg.tss.size(); ++s) {
    const auto label = tss_label(cfg.tss[s]);
    for (std::size_t r = 0; r < runs.size(); ++r) {
      std::string content = features_header();
      for (std::size_t k = 0; k < tasks.size(); ++k)
        if (tasks[k].run == r) content += text[k][s];
      io::atomic_write(features_path(out, label, runs[r].key), content);
    }
  }
  return result;
}

// ---------------------------------------------------------------- evaluate

inline const std::vector<std::string>& errors_columns() {
  static const std::vector<std::string> c{"run_id", "dim",   "function", "instance", "seed",   "generation",
                                          "tss",    "model", "mse",      "rde",      "status", "reason"};
  return c;
}

inline fs::path errors_path(const fs::path& out) { return out / "errors.csv"; }

/// Trains every model under every selection method on the original archive
/// of each selected generation and scores it on that generation's population.
inline StageResult cmd_evaluate(const ExperimentConfig& cfg, const fs::path& out) {
  StageResult result{"evaluate", {}};
  const auto runs = load_runs(cfg, out, result.failures);

  struct Task {
    std::size_t run;
    std::size_t gen;
  };
  std::vector<Task> tasks;
  for (std::size_t r = 0; r < runs.size(); ++r)
    for (auto g : selected_generations(runs[r], cfg)) tasks.push_back({r, g});

  std::vector<std::vector<std::vector<std::string>>> rows(tasks.size());
  std::vector<std::vector<Failure>> cell_failures(tasks.size());
  auto failures = parallel_for(
      tasks.size(),
      [&](std::size_t k) {
        const auto& [r, g] = tasks[k];
        const auto& run = runs[r];
        const auto& snap = run.record.generations[g];
        const auto archive = run.record.archive_before(g);
        const auto test = run.record.population(g);
        const int mu = snap.lambda / 2;
        for (const auto& t : cfg.tss) {
          const auto label = tss_label(t);
          for (const auto& m : cfg.models) {
            std::vector<std::string> row{run.key.id(),
                                         std::to_string(run.key.dim),
                                         run.key.function,
                                         std::to_string(run.key.instance),
                                         std::to_string(run.key.seed),
                                         std::to_string(g),
                                         label,
                                         m.name()};
            try {
              Rng rng(derive_seed(m.seed, fnv1a(run.key.id() + "/" + std::to_string(g) + "/" + label)));
              const auto fit = models::train_model(archive, t, m, snap.state, test.points, snap.lambda, rng);
              const auto e = models::evaluate_errors(fit, test, mu);
              if (e.not_trained) {
                row.insert(row.end(), {"missing", "missing", "not_trained", csv_safe(e.reason)});
              } else {
                row.insert(row.end(), {io::format_double(*e.mse), io::format_double(*e.rde), "ok", ""});
              }
            } catch (const std::exception& e) {
              row.insert(row.end(), {"missing", "missing", "failed", csv_safe(e.what())});
              cell_failures[k].push_back({run.key.id() + "/g" + std::to_string(g) + "/" + label + "/" + m.name(),
                                          e.what()});
            }
            rows[k].push_back(std::move(row));
          }
        }
      },
      [&](std::size_t k) { return runs[tasks[k].run].key.id() + "/g" + std::to_string(tasks[k].gen); });
  result.failures.insert(result.failures.end(), failures.begin(), failures.end());
  for (auto& f : cell_failures) result.failures.insert(result.failures.end(), f.begin(), f.end());

  Table table;
  table.header = errors_columns();
  for (auto& task_rows : rows)
    for (auto& row : task_rows) table.rows.push_back(std::move(row));
  io::atomic_write(errors_path(out), table.to_csv());
  return result;
}

// ---------------------------------------------------------------- split

inline fs::path split_dir(const fs::path& out) { return out / "split"; }

/// Splits the error table by the levels of the split axis; inside every
/// stratum a seeded share of levels goes to validation, the rest to test.
inline StageResult cmd_split(const ExperimentConfig& cfg, const fs::path& out) {
  if (!fs::exists(errors_path(out))) throw Error(ErrorCode::Io, "no errors.csv under " + out.string());
  const auto table = Table::parse(io::read_file(errors_path(out)));
  const auto axis = table.column(cfg.split.axis);
  std::vector<std::size_t> strat;
  for (const auto& s : cfg.split.stratify) strat.push_back(table.column(s));

  // levels per stratum, in order of first appearance
  std::map<std::string, std::vector<std::string>> levels;
  std::vector<std::string> stratum_of(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    std::string key;
    for (auto c : strat) key += table.rows[i][c] + "|";
    stratum_of[i] = key;
    auto& lv = levels[key];
    if (std::find(lv.begin(), lv.end(), table.rows[i][axis]) == lv.end()) lv.push_back(table.rows[i][axis]);
  }

  std::map<std::string, std::set<std::string>> validation;
  for (const auto& [key, lv] : levels) {
    if (lv.size() < 2)
      throw Error(ErrorCode::Config,
                  "split axis '" + cfg.split.axis + "' has fewer than 2 levels in stratum " + key);
    const auto l = static_cast<long>(lv.size());
    const long n_val = std::clamp(std::lround(cfg.split.validation_fraction * static_cast<double>(l)), 1L, l - 1);
    Rng rng(derive_seed(cfg.split.seed, fnv1a(key)));
    const auto perm = random_permutation(lv.size(), rng);
    for (long i = 0; i < n_val; ++i) validation[key].insert(lv[perm[static_cast<std::size_t>(i)]]);
  }

  Table val, test;
  val.header = test.header = table.header;
  for (std::size_t i = 0; i < table.rows.size(); ++i)
    (validation[stratum_of[i]].count(table.rows[i][axis]) ? val : test).rows.push_back(table.rows[i]);
  io::atomic_write(split_dir(out) / "validation.csv", val.to_csv());
  io::atomic_write(split_dir(out) / "test.csv", test.to_csv());
  return {"split", {}};
}

}  // namespace elas::pipeline

#endif  // ELAS_PIPELINE_COMMANDS_HPP
