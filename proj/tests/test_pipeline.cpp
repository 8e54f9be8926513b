#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <set>

#include "elas/pipeline/analyze.hpp"
#include "elas/pipeline/commands.hpp"

using namespace elas;
using namespace elas::pipeline;
namespace fs = std::filesystem;

namespace {

/// Fresh directory per test, removed afterwards.
class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() / ("elas_pipeline_" + std::string(info->test_suite_name()) + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.dims = {2};
  c.functions = {"sphere"};
  c.instances = {1};
  c.seeds = {1};
  c.budget_per_dim = 40;
  c.generations_sampled = 3;
  c.resamples = 2;
  c.tss = {tss::TssSpec::full()};
  models::ModelSettings lq;
  lq.family = models::Family::Lq;
  c.models = {lq};
  c.seed = 5;
  return c;
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files[fs::relative(e.path(), root).generic_string()] = io::read_file(e.path());
  return files;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

// ---------------------------------------------------------------- config

TEST(Config, DefaultsEncodePaperConstants) {
  const ExperimentConfig c;
  EXPECT_EQ(c.budget_per_dim, 250);
  EXPECT_DOUBLE_EQ(c.target, 1e-8);
  EXPECT_EQ(c.generations_sampled, 100);
  EXPECT_EQ(c.resamples, 100);
  EXPECT_EQ(c.features.dispersion_quantiles, (std::vector<double>{0.02, 0.05, 0.1, 0.25}));
  EXPECT_DOUBLE_EQ(c.features.ic_settling, 0.05);
  EXPECT_DOUBLE_EQ(c.features.ic_partial_ratio, 0.5);
  EXPECT_DOUBLE_EQ(c.analysis.nanout_exclusion, 0.25);
  EXPECT_DOUBLE_EQ(c.analysis.robustness_threshold, 0.9);
  EXPECT_DOUBLE_EQ(c.analysis.robustness_delta, 0.05);
  EXPECT_DOUBLE_EQ(c.analysis.cluster_threshold, 0.9);
  EXPECT_EQ(c.analysis.cluster_runs, 5);
  EXPECT_DOUBLE_EQ(c.split.validation_fraction, 1.0 / 8.0);
}

TEST(Config, EmptyJsonGivesDefaultsAndRoundTrips) {
  const auto c = config_from_json(json::object());
  EXPECT_EQ(c.dims, ExperimentConfig{}.dims);
  const auto j = config_to_json(c);
  EXPECT_EQ(config_to_json(config_from_json(j)), j);
}

TEST(Config, UnknownKeyIsConfigError) {
  try {
    config_from_json(json{{"dimz", {2}}});
    FAIL() << "expected a config error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Config);
  }
}

TEST(Config, InvalidValuesAreConfigErrors) {
  for (const json& j : {json{{"dims", json::array()}}, json{{"functions", {"no_such_function"}}},
                        json{{"budget_per_dim", 0}}, json{{"split", {{"validation_fraction", 1.0}}}}}) {
    try {
      config_from_json(j);
      ADD_FAILURE() << "accepted " << j.dump();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::Config) << j.dump();
    }
  }
}

// ---------------------------------------------------------------- parallel / store helpers

TEST(Parallel, ThreadCountHonoursEnvironment) {
  ::setenv("ELAS_THREADS", "3", 1);
  EXPECT_EQ(thread_count(), 3u);
  ::setenv("ELAS_THREADS", "junk", 1);
  EXPECT_GE(thread_count(), 1u);
  ::unsetenv("ELAS_THREADS");
}

TEST(Parallel, FailuresAreCollectedInTaskOrder) {
  ::setenv("ELAS_THREADS", "4", 1);
  std::vector<int> done(20, 0);
  const auto f = parallel_for(
      20,
      [&](std::size_t i) {
        if (i % 7 == 3) throw Error(ErrorCode::InvalidArgument, "boom " + std::to_string(i));
        done[i] = 1;
      },
      [](std::size_t i) { return "t" + std::to_string(i); });
  ::unsetenv("ELAS_THREADS");
  ASSERT_EQ(f.size(), 3u);
  EXPECT_EQ(f[0].task, "t3");
  EXPECT_EQ(f[1].task, "t10");
  EXPECT_EQ(f[2].task, "t17");
  EXPECT_EQ(std::count(done.begin(), done.end(), 1), 17);
}

TEST(Store, SampledGenerationsAreDistinctSortedAndSkipTheFirst) {
  const auto g = sample_generations(50, 10, 3);
  ASSERT_EQ(g.size(), 10u);
  EXPECT_TRUE(std::is_sorted(g.begin(), g.end()));
  EXPECT_EQ(std::set<std::size_t>(g.begin(), g.end()).size(), 10u);
  EXPECT_GE(g.front(), 1u);
  EXPECT_LT(g.back(), 50u);
  EXPECT_EQ(sample_generations(5, 10, 3), (std::vector<std::size_t>{1, 2, 3, 4}));
  EXPECT_EQ(g, sample_generations(50, 10, 3));
}

TEST(Store, ResampleCsvRoundTrip) {
  Resample r;
  r.archive.push_back((Point(2) << 0.1, -2.5).finished(), 3.0);
  r.archive.push_back((Point(2) << 1e-300, 7.0).finished(), -1.25);
  r.population.push_back((Point(2) << 0.3, 0.4).finished(), 0.5);
  const auto back = resample_from_csv(resample_to_csv(r, 2));
  ASSERT_EQ(back.archive.size(), 2u);
  ASSERT_EQ(back.population.size(), 1u);
  EXPECT_EQ(back.archive.points[1](0), 1e-300);
  EXPECT_EQ(*back.archive.outputs[1], -1.25);
  EXPECT_EQ(back.population.points[0](1), 0.4);
}

// ---------------------------------------------------------------- generate

TEST(Generate, OneRunGivesOneRecord) {
  TempDir dir;
  const auto cfg = tiny_config();
  ASSERT_TRUE(cmd_generate(cfg, dir.path()).ok());
  std::size_t runs = 0;
  for (const auto& e : fs::directory_iterator(store_dir(dir.path())))
    if (e.is_directory()) ++runs;
  EXPECT_EQ(runs, 1u);
  const auto key = enumerate_runs(cfg).front();
  const auto run = read_run(dir.path(), key);
  EXPECT_EQ(run.sampled.size(), 3u);
  EXPECT_FALSE(run.record.generations.empty());
  EXPECT_EQ(run.record.archive.size(), run.record.generations.back().archive_end);
}

TEST(Generate, RerunIsByteIdentical) {
  TempDir dir;
  const auto cfg = tiny_config();
  ASSERT_TRUE(cmd_generate(cfg, dir / "a").ok());
  ASSERT_TRUE(cmd_generate(cfg, dir / "b").ok());
  const auto a = read_tree(dir / "a"), b = read_tree(dir / "b");
  EXPECT_GT(a.size(), 3u);
  EXPECT_EQ(a, b);
}

TEST(Generate, HundredResamplesPerSampledGeneration) {
  TempDir dir;
  auto cfg = tiny_config();
  cfg.generations_sampled = 2;
  cfg.resamples = 100;
  ASSERT_TRUE(cmd_generate(cfg, dir.path()).ok());
  const auto key = enumerate_runs(cfg).front();
  const auto run = read_run(dir.path(), key);
  ASSERT_EQ(run.sampled.size(), 2u);
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(run_dir(dir.path(), key) / "resamples")) ++files;
  EXPECT_EQ(files, 200u);
  // each resample redraws one population per earlier generation plus the current one
  const auto g = run.sampled.back();
  const auto r = resample_from_csv(io::read_file(resample_path(dir.path(), key, g, 99)));
  EXPECT_EQ(r.archive.size(), run.record.generations[g].archive_begin);
  EXPECT_EQ(r.population.size(), static_cast<std::size_t>(run.record.generations[g].lambda));
}

// ---------------------------------------------------------------- features

namespace {
std::set<std::pair<std::string, std::string>> variants_of_first_group(const std::string& csv) {
  const auto t = Table::parse(csv);
  std::set<std::pair<std::string, std::string>> v;
  const auto& first = t.rows.front();
  for (const auto& r : t.rows)
    if (r[1] == first[1] && r[2] == first[2]) v.insert({r[3], r[4]});
  return v;
}
}  // namespace

TEST(Features, FullHasFourVariantsNearestEight) {
  TempDir dir;
  auto cfg = tiny_config();
  cfg.generations_sampled = 1;
  cfg.resamples = 1;
  cfg.tss = {tss::TssSpec::full(), {tss::Method::Nearest, {}, {}, {}}};
  ASSERT_TRUE(cmd_generate(cfg, dir.path()).ok());
  ASSERT_TRUE(cmd_features(cfg, dir.path()).ok());
  const auto key = enumerate_runs(cfg).front();
  const auto full = io::read_file(features_path(dir.path(), "full", key));
  const auto nearest = io::read_file(features_path(dir.path(), "nearest", key));
  EXPECT_EQ(variants_of_first_group(full).size(), 4u);
  EXPECT_EQ(variants_of_first_group(nearest).size(), 8u);
  EXPECT_NE(full.find(",nanout\n"), std::string::npos) << "NAN_OUT values are written as such";
}

TEST(Features, EmptyGenerationFilterWritesHeaderOnly) {
  TempDir dir;
  auto cfg = tiny_config();
  cfg.generation_filter = std::vector<long>{};
  ASSERT_TRUE(cmd_generate(cfg, dir.path()).ok());
  ASSERT_TRUE(cmd_features(cfg, dir.path()).ok());
  EXPECT_EQ(io::read_file(features_path(dir.path(), "full", enumerate_runs(cfg).front())), features_header());
}

TEST(Features, MissingStoreIsAnError) {
  TempDir dir;
  EXPECT_THROW(cmd_features(tiny_config(), dir / "nothing"), Error);
}

TEST(Features, MissingResampleIsReportedNotFatal) {
  TempDir dir;
  const auto cfg = tiny_config();
  ASSERT_TRUE(cmd_generate(cfg, dir.path()).ok());
  const auto key = enumerate_runs(cfg).front();
  const auto run = read_run(dir.path(), key);
  fs::remove(resample_path(dir.path(), key, run.sampled.front(), 0));
  const auto r = cmd_features(cfg, dir.path());
  ASSERT_EQ(r.failures.size(), 1u);
  // the remaining tasks still produce rows
  EXPECT_GT(count_lines(io::read_file(features_path(dir.path(), "full", key))), 1u);
}

// ---------------------------------------------------------------- evaluate

TEST(Evaluate, RowCountIsModelsTimesGenerations) {
  TempDir dir;
  auto cfg = tiny_config();
  models::ModelSettings gp;
  gp.family = models::Family::Gp;
  cfg.models.push_back(gp);
  ASSERT_TRUE(cmd_generate(cfg, dir.path()).ok());
  ASSERT_TRUE(cmd_evaluate(cfg, dir.path()).ok());
  const auto t = Table::parse(io::read_file(errors_path(dir.path())));
  EXPECT_EQ(t.header, errors_columns());
  EXPECT_EQ(t.rows.size(), cfg.models.size() * 3);
}

TEST(Evaluate, QuadraticFitnessAndLqGiveNearZeroMse) {
  TempDir dir;
  auto cfg = tiny_config();
  cfg.budget_per_dim = 100;
  cfg.generations_sampled = 10;
  ASSERT_TRUE(cmd_generate(cfg, dir.path()).ok());
  ASSERT_TRUE(cmd_evaluate(cfg, dir.path()).ok());
  const auto t = Table::parse(io::read_file(errors_path(dir.path())));
  int ok = 0;
  for (const auto& r : t.rows) {
    if (r[t.column("status")] != "ok") continue;
    ++ok;
    EXPECT_LT(io::parse_double(r[t.column("mse")]), 1e-10);
    EXPECT_EQ(io::parse_double(r[t.column("rde")]), 0.0);
  }
  EXPECT_GT(ok, 5);
}

TEST(Evaluate, ConstantFitnessLeavesEveryModelMissing) {
  TempDir dir;
  auto cfg = tiny_config();
  models::ModelSettings gp;
  gp.family = models::Family::Gp;
  cfg.models.push_back(gp);
  cfg.tss.push_back({tss::Method::Nearest, {}, {}, {}});
  ASSERT_TRUE(cmd_generate(cfg, dir.path()).ok());
  // flatten the stored fitness
  const auto key = enumerate_runs(cfg).front();
  auto run = read_run(dir.path(), key);
  for (auto& y : run.record.archive.outputs) y = 4.0;
  write_run(dir.path(), run);

  ASSERT_TRUE(cmd_evaluate(cfg, dir.path()).ok());
  const auto t = Table::parse(io::read_file(errors_path(dir.path())));
  ASSERT_FALSE(t.rows.empty());
  for (const auto& r : t.rows) {
    EXPECT_EQ(r[t.column("status")], "not_trained");
    EXPECT_EQ(r[t.column("mse")], "missing");
    EXPECT_EQ(r[t.column("rde")], "missing");
    EXPECT_FALSE(r[t.column("reason")].empty());
  }
}

// ---------------------------------------------------------------- split

namespace {
void write_level_table(const fs::path& out, int levels) {
  Table t;
  t.header = errors_columns();
  for (int inst = 1; inst <= 3; ++inst)
    for (int l = 0; l < levels; ++l)
      for (int g = 1; g <= 2; ++g)
        t.rows.push_back({"f_d2_i" + std::to_string(inst) + "_s1", "2", "f", std::to_string(inst), "1",
                          std::to_string(g), "full", "gp-K" + std::to_string(l), "1", "0", "ok", ""});
  io::atomic_write(errors_path(out), t.to_csv());
}
}  // namespace

TEST(Split, EightLevelsGoSevenToTestOneToValidation) {
  TempDir dir;
  write_level_table(dir.path(), 8);
  auto cfg = tiny_config();
  cfg.split.seed = 11;
  ASSERT_TRUE(cmd_split(cfg, dir.path()).ok());
  const auto val = Table::parse(io::read_file(split_dir(dir.path()) / "validation.csv"));
  const auto test = Table::parse(io::read_file(split_dir(dir.path()) / "test.csv"));
  const auto model = val.column("model"), inst = val.column("instance");
  std::map<std::string, std::set<std::string>> v, s;
  for (const auto& r : val.rows) v[r[inst]].insert(r[model]);
  for (const auto& r : test.rows) s[r[inst]].insert(r[model]);
  for (const auto* i : {"1", "2", "3"}) {
    EXPECT_EQ(v[i].size(), 1u);
    EXPECT_EQ(s[i].size(), 7u);
    for (const auto& m : v[i]) EXPECT_EQ(s[i].count(m), 0u);
  }

  // union of outputs equals the input rows
  const auto all = Table::parse(io::read_file(errors_path(dir.path())));
  std::multiset<std::vector<std::string>> in(all.rows.begin(), all.rows.end()), out(val.rows.begin(), val.rows.end());
  out.insert(test.rows.begin(), test.rows.end());
  EXPECT_EQ(in, out);

  // same seed, same split
  const auto first = io::read_file(split_dir(dir.path()) / "validation.csv");
  ASSERT_TRUE(cmd_split(cfg, dir.path()).ok());
  EXPECT_EQ(io::read_file(split_dir(dir.path()) / "validation.csv"), first);
}

TEST(Split, SingleLevelAxisIsRejected) {
  TempDir dir;
  write_level_table(dir.path(), 1);
  try {
    cmd_split(tiny_config(), dir.path());
    FAIL() << "expected a config error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Config);
  }
}

TEST(Split, UnknownAxisIsRejected) {
  TempDir dir;
  write_level_table(dir.path(), 8);
  auto cfg = tiny_config();
  cfg.split.axis = "kernel";
  EXPECT_THROW(cmd_split(cfg, dir.path()), Error);
}

// ---------------------------------------------------------------- analyze

namespace {
/// Synthetic samples: `cases` runs with one generation each and `res` resamples.
FeatureSamples synthetic(std::size_t cases, std::size_t res,
                         const std::vector<std::pair<std::string, std::function<double(std::size_t, std::size_t)>>>& f) {
  FeatureSamples s;
  for (std::size_t c = 0; c < cases; ++c) s.cases.push_back({"sphere_d2_i" + std::to_string(c) + "_s1", 1});
  for (const auto& [name, gen] : f) {
    s.features.push_back(name);
    auto& v = s.values.emplace_back(cases);
    auto& p = s.points.emplace_back(cases);
    for (std::size_t c = 0; c < cases; ++c)
      for (std::size_t r = 0; r < res; ++r) {
        v[c].push_back(gen(c, r));
        p[c].push_back(10);
      }
  }
  return s;
}

std::map<std::string, RunKey> synthetic_runs(std::size_t cases) {
  std::map<std::string, RunKey> m;
  for (std::size_t c = 0; c < cases; ++c) {
    RunKey k{2, "sphere", c, 1};
    m.emplace(k.id(), k);
  }
  return m;
}
}  // namespace

TEST(Analyze, ThirtyPercentNanoutIsExcludedConstantIsRetained) {
  Rng rng(4);
  std::normal_distribution<double> n01;
  std::vector<double> noise(400);
  for (auto& x : noise) x = n01(rng);
  const auto s = synthetic(40, 10,
                           {{"a.thirty@A", [](std::size_t c, std::size_t r) {
                               return (c * 10 + r) % 10 < 3 ? features::kNanOut : static_cast<double>(c);
                             }},
                            {"b.twenty@A", [](std::size_t c, std::size_t r) {
                               return (c * 10 + r) % 10 < 2 ? features::kNanOut : static_cast<double>(c);
                             }},
                            {"c.constant@A", [](std::size_t, std::size_t) { return 3.5; }},
                            {"d.noise@A", [&](std::size_t c, std::size_t r) { return noise[c * 10 + r]; }}});
  const auto rep = screen_features(s, AnalysisConfig{}, synthetic_runs(40));
  ASSERT_EQ(rep.size(), 4u);
  EXPECT_NEAR(rep[0].nan_rate, 0.3, 1e-12);
  EXPECT_TRUE(rep[0].excluded);
  EXPECT_FALSE(rep[0].retained);
  EXPECT_FALSE(rep[1].excluded);
  EXPECT_DOUBLE_EQ(rep[2].robustness, 1.0);
  EXPECT_TRUE(rep[2].retained);
  EXPECT_LT(rep[3].robustness, 0.05);
  EXPECT_FALSE(rep[3].retained);
  ASSERT_TRUE(rep[2].normalization.has_value());
  EXPECT_TRUE(rep[2].normalization->degenerate());
  EXPECT_FALSE(rep[2].dim_test.has_value()) << "one dimension: nothing to screen";
}

TEST(Analyze, DuplicatedColumnsShareOneClusterAndOneMedoid) {
  Rng rng(9);
  std::uniform_real_distribution<double> u;
  std::vector<double> a(60), b(60);
  for (auto& x : a) x = u(rng);
  for (auto& x : b) x = u(rng);
  // constant across resamples so every feature is robust
  const auto s = synthetic(60, 3,
                           {{"x.first@A", [&](std::size_t c, std::size_t) { return a[c]; }},
                            {"x.copy@A", [&](std::size_t c, std::size_t) { return a[c]; }},
                            {"y.other@A", [&](std::size_t c, std::size_t) { return b[c]; }}});
  const AnalysisConfig cfg;
  const auto rep = screen_features(s, cfg, synthetic_runs(60));
  for (const auto& r : rep) ASSERT_TRUE(r.retained) << r.feature;
  const auto cl = cluster_features(s, rep, cfg, 1);
  EXPECT_EQ(cl.k_hierarchical, 2);
  ASSERT_EQ(cl.medoids.labels.size(), 3u);
  EXPECT_EQ(cl.medoids.labels[0], cl.medoids.labels[1]);
  EXPECT_NE(cl.medoids.labels[0], cl.medoids.labels[2]);
  int dup_medoids = 0;
  for (auto m : cl.medoids.medoids) dup_medoids += m < 2;
  EXPECT_EQ(dup_medoids, 1);
}

TEST(Analyze, DimensionScreenDetectsDimensionDependence) {
  FeatureSamples s;
  std::map<std::string, RunKey> runs;
  for (int d : {2, 3, 5})
    for (std::uint64_t inst = 1; inst <= 6; ++inst) {
      RunKey k{d, "sphere", inst, 1};
      runs.emplace(k.id(), k);
      s.cases.push_back({k.id(), 4});
    }
  std::sort(s.cases.begin(), s.cases.end());
  s.features = {"basic.dim@A"};
  s.values.assign(1, {});
  s.points.assign(1, {});
  for (const auto& c : s.cases) {
    s.values[0].push_back({static_cast<double>(runs.at(c.run_id).dim)});
    s.points[0].push_back({5});
  }
  const auto rep = screen_features(s, AnalysisConfig{}, runs);
  ASSERT_TRUE(rep[0].dim_test.has_value());
  // every block ranks the dimensions identically: statistic n(k-1)
  EXPECT_NEAR(rep[0].dim_test->statistic, 12.0, 1e-9);
  EXPECT_TRUE(rep[0].dim_dependent);
}

TEST(Analyze, BestCombinationTakesTheFirstOnTies) {
  Table t;
  t.header = errors_columns();
  auto row = [&](const std::string& run, const std::string& model, const std::string& mse) {
    t.rows.push_back({run, "2", "sphere", "1", "1", "3", "full", model, mse, "0", "ok", ""});
  };
  row("r1", "lq", "1");
  row("r1", "gp-SE", "0.5");
  row("r2", "lq", "2");
  row("r2", "gp-SE", "2");
  row("r3", "lq", "missing");
  row("r3", "gp-SE", "missing");
  const auto m = error_matrix(t, "mse");
  ASSERT_EQ(m.combos, (std::vector<std::string>{"lq:full", "gp-SE:full"}));
  const auto best = best_combos(m);
  EXPECT_EQ(best[0], std::optional<std::size_t>(1));
  EXPECT_EQ(best[1], std::optional<std::size_t>(0));
  EXPECT_FALSE(best[2].has_value());

  row("r1", "lq", "3");
  EXPECT_THROW(error_matrix(t, "mse"), Error) << "duplicate keys are inconsistent";
}

TEST(Analyze, FeatureTablesParseIntoCasesAndResamples) {
  const std::string csv = features_header() +
                          "r_a,3,0,A,0,basic.obs,12\n"
                          "r_a,3,0,A,0,f.x,1.5\n"
                          "r_a,3,1,A,0,basic.obs,12\n"
                          "r_a,3,1,A,0,f.x,nanout\n"
                          "r_a,3,0,A,1,f.x,inf\n"
                          "r_a,3,1,A,1,f.x,-inf\n";
  const auto s = parse_feature_tables({csv});
  ASSERT_EQ(s.cases.size(), 1u);
  ASSERT_EQ(s.features, (std::vector<std::string>{"basic.obs@A", "f.x@A", "f.x@A_t"}));
  EXPECT_EQ(s.values[1][0][0], 1.5);
  EXPECT_TRUE(std::isnan(s.values[1][0][1]));
  EXPECT_EQ(s.points[2][0], (std::vector<std::size_t>{12, 12}));
  EXPECT_EQ(s.values[2][0][1], -features::kInf);
}

TEST(Analyze, EndToEndWritesReportsAndIsDeterministic) {
  TempDir dir;
  auto cfg = tiny_config();
  cfg.seeds = {1, 2};
  cfg.budget_per_dim = 60;
  cfg.generations_sampled = 4;
  cfg.resamples = 3;
  models::ModelSettings lmm;
  lmm.family = models::Family::Lmm;
  cfg.models.push_back(lmm);
  cfg.tss.push_back({tss::Method::Nearest, {}, {}, {}});
  for (const auto* sub : {"a", "b"}) {
    const auto out = dir / sub;
    ASSERT_TRUE(cmd_generate(cfg, out).ok());
    ASSERT_TRUE(cmd_features(cfg, out).ok());
    ASSERT_TRUE(cmd_evaluate(cfg, out).ok());
    ASSERT_TRUE(cmd_analyze(cfg, out).ok());
  }
  for (const auto* f : {"analysis/full/feature_report.csv", "analysis/full/normalization.json",
                        "analysis/full/clusters.csv", "analysis/nearest/ks_mse.csv", "analysis/nearest/ks_rde.csv",
                        "analysis/wins_mse.csv", "analysis/wins_rde.csv", "analysis/summary.json"})
    EXPECT_TRUE(fs::exists(dir / "a" / f)) << f;
  EXPECT_EQ(read_tree(dir / "a"), read_tree(dir / "b"));
  const auto summary = json::parse(io::read_file(dir / "a" / "analysis/summary.json"));
  EXPECT_EQ(summary.at("error_table"), "errors.csv");
}

TEST(Analyze, ErrorRowsWithoutFeaturesAreInconsistent) {
  TempDir dir;
  const auto cfg = tiny_config();
  ASSERT_TRUE(cmd_generate(cfg, dir.path()).ok());
  ASSERT_TRUE(cmd_features(cfg, dir.path()).ok());
  ASSERT_TRUE(cmd_evaluate(cfg, dir.path()).ok());
  auto t = Table::parse(io::read_file(errors_path(dir.path())));
  t.rows.front()[t.column("generation")] = "9999";
  io::atomic_write(errors_path(dir.path()), t.to_csv());
  try {
    cmd_analyze(cfg, dir.path());
    FAIL() << "expected an inconsistency error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
}

TEST(Analyze, PrefersTheTestSplitWhenPresent) {
  TempDir dir;
  auto cfg = tiny_config();
  models::ModelSettings lmm;
  lmm.family = models::Family::Lmm;
  cfg.models.push_back(lmm);
  cfg.split.axis = "model";
  cfg.split.validation_fraction = 0.5;
  ASSERT_TRUE(cmd_generate(cfg, dir.path()).ok());
  ASSERT_TRUE(cmd_features(cfg, dir.path()).ok());
  ASSERT_TRUE(cmd_evaluate(cfg, dir.path()).ok());
  ASSERT_TRUE(cmd_split(cfg, dir.path()).ok());
  ASSERT_TRUE(cmd_analyze(cfg, dir.path()).ok());
  const auto summary = json::parse(io::read_file(dir / "analysis/summary.json"));
  EXPECT_EQ(summary.at("error_table"), "split/test.csv");
}
