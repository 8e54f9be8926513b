#ifndef ELAS_PIPELINE_STORE_HPP
#define ELAS_PIPELINE_STORE_HPP

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "elas/cmaes.hpp"
#include "elas/core/io.hpp"
#include "elas/pipeline/config.hpp"

namespace elas::pipeline {

namespace fs = std::filesystem;

/// 64-bit FNV-1a; stable across platforms, used to derive per-task seeds.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

struct RunKey {
  int dim = 2;
  std::string function;
  std::uint64_t instance = 0;
  std::uint64_t seed = 0;

  std::string id() const {
    return function + "_d" + std::to_string(dim) + "_i" + std::to_string(instance) + "_s" + std::to_string(seed);
  }
};

/// Runs in a fixed order: dim, function, instance, seed.
inline std::vector<RunKey> enumerate_runs(const ExperimentConfig& c) {
  std::vector<RunKey> out;
  for (int d : c.dims)
    for (const auto& f : c.functions)
      for (auto i : c.instances)
        for (auto s : c.seeds) out.push_back({d, f, i, s});
  return out;
}

inline std::uint64_t run_seed(const ExperimentConfig& c, const RunKey& k) { return derive_seed(c.seed, fnv1a(k.id())); }

/// Label that keeps differently parameterized selections apart.
inline std::string tss_label(const tss::TssSpec& s) {
  std::string l = tss::to_string(s.method);
  if (s.k) l += "_k" + std::to_string(*s.k);
  if (s.n_max) l += "_n" + std::to_string(*s.n_max);
  if (s.r_max) l += "_r" + io::format_double(*s.r_max);
  return l;
}

struct StoredRun {
  RunKey key;
  cma::RunRecord record;
  std::vector<std::size_t> sampled;  // generation indices, ascending
};

inline fs::path store_dir(const fs::path& out) { return out / "store"; }
inline fs::path run_dir(const fs::path& out, const RunKey& k) { return store_dir(out) / k.id(); }

inline fs::path resample_path(const fs::path& out, const RunKey& k, std::size_t gen, int i) {
  return run_dir(out, k) / "resamples" / ("g" + std::to_string(gen) + "_" + std::to_string(i) + ".csv");
}

inline bench::ObjectiveInstance make_objective(const RunKey& k) {
  return bench::make_instance(bench::parse_base(k.function), k.dim, k.instance);
}

/// Uniform choice without replacement among generations that have an archive.
inline std::vector<std::size_t> sample_generations(std::size_t n_generations, int count, std::uint64_t seed) {
  std::vector<std::size_t> candidates;
  for (std::size_t g = 1; g < n_generations; ++g) candidates.push_back(g);
  if (candidates.size() > static_cast<std::size_t>(count)) {
    Rng rng(derive_seed(seed, 0x67656e73ull));
    const auto perm = random_permutation(candidates.size(), rng);
    std::vector<std::size_t> pick;
    for (std::size_t i = 0; i < static_cast<std::size_t>(count); ++i) pick.push_back(candidates[perm[i]]);
    candidates = std::move(pick);
  }
  std::sort(candidates.begin(), candidates.end());
  return candidates;
}

/// Sampled generations that pass the optional filter.
inline std::vector<std::size_t> selected_generations(const StoredRun& run, const ExperimentConfig& c) {
  if (!c.generation_filter) return run.sampled;
  std::vector<std::size_t> out;
  for (auto g : run.sampled)
    if (std::find(c.generation_filter->begin(), c.generation_filter->end(), static_cast<long>(g)) !=
        c.generation_filter->end())
      out.push_back(g);
  return out;
}

inline void write_run(const fs::path& out, const StoredRun& run) {
  const auto dir = run_dir(out, run.key);
  std::string states;
  for (std::size_t g = 0; g < run.record.generations.size(); ++g) {
    const auto& s = run.record.generations[g];
    const json line{{"index", g},
                    {"lambda", s.lambda},
                    {"archive_begin", s.archive_begin},
                    {"archive_end", s.archive_end},
                    {"state", io::state_to_json(s.state)}};
    states += line.dump() + "\n";
  }
  io::atomic_write(dir / "states.jsonl", states);
  io::atomic_write(dir / "archive.csv", io::sample_set_to_csv(run.record.archive, run.key.dim));
  const json meta{{"run_id", run.key.id()},
                  {"dim", run.key.dim},
                  {"function", run.key.function},
                  {"instance", run.key.instance},
                  {"seed", run.key.seed},
                  {"termination", std::string(cma::to_string(run.record.termination))},
                  {"covariance_repairs", run.record.covariance_repairs},
                  {"evaluations", run.record.archive.size()},
                  {"generations", run.record.generations.size()},
                  {"sampled_generations", run.sampled}};
  io::atomic_write(dir / "run.json", meta.dump(2) + "\n");
}

inline StoredRun read_run(const fs::path& out, const RunKey& key) {
  const auto dir = run_dir(out, key);
  if (!fs::exists(dir / "run.json")) throw Error(ErrorCode::Io, "missing run store " + dir.string());
  StoredRun run;
  run.key = key;
  try {
    const auto meta = json::parse(io::read_file(dir / "run.json"));
    run.sampled = meta.at("sampled_generations").get<std::vector<std::size_t>>();
    std::istringstream states(io::read_file(dir / "states.jsonl"));
    std::string line;
    while (std::getline(states, line)) {
      if (line.empty()) continue;
      const auto j = json::parse(line);
      cma::GenerationSnapshot s;
      s.lambda = j.at("lambda").get<int>();
      s.archive_begin = j.at("archive_begin").get<std::size_t>();
      s.archive_end = j.at("archive_end").get<std::size_t>();
      s.state = io::state_from_json(j.at("state"));
      run.record.generations.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, "malformed store in " + dir.string() + ": " + e.what());
  }
  run.record.archive = io::sample_set_from_csv(io::read_file(dir / "archive.csv"));
  return run;
}

/// A resampled archive and population for one generation.
struct Resample {
  SampleSet archive;
  SampleSet population;  // evaluated; outputs are hidden for features
};

/// Re-draws every earlier generation and the population itself from the
/// smoothed distributions, evaluating all points.
inline Resample draw_resample(const cma::RunRecord& record, std::size_t g, bench::ObjectiveInstance& objective,
                              std::uint64_t seed) {
  Rng rng(seed);
  Resample r;
  for (std::size_t n = 0; n < g; ++n) {
    auto s = cma::smoothed_sample(record, n, static_cast<std::size_t>(record.generations[n].lambda), rng);
    for (auto& x : s.points) r.archive.push_back(x, objective.evaluate(x));
  }
  auto p = cma::smoothed_sample(record, g, static_cast<std::size_t>(record.generations[g].lambda), rng);
  for (auto& x : p.points) r.population.push_back(x, objective.evaluate(x));
  return r;
}

// Resample CSV: set,x1..xd,y with set in {A, P}.

inline std::string resample_to_csv(const Resample& r, int dim) {
  std::string out = "set,";
  for (int j = 0; j < dim; ++j) out += "x" + std::to_string(j + 1) + ",";
  out += "y\n";
  auto rows = [&](const SampleSet& s, const char* tag) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      out += tag;
      for (int j = 0; j < dim; ++j) out += "," + io::format_double(s.points[i](j));
      out += ",";
      if (s.outputs[i]) out += io::format_double(*s.outputs[i]);
      out += "\n";
    }
  };
  rows(r.archive, "A");
  rows(r.population, "P");
  return out;
}

inline Resample resample_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Io, "empty resample file");
  const auto header = io::split_csv_line(line);
  require(header.size() >= 3 && header.front() == "set" && header.back() == "y", ErrorCode::Io,
          "resample CSV must have columns set,x1..xd,y");
  const auto d = static_cast<Eigen::Index>(header.size() - 2);
  Resample r;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = io::split_csv_line(line);
    require(static_cast<Eigen::Index>(f.size()) == d + 2, ErrorCode::Io, "malformed resample row: " + line);
    Point x(d);
    for (Eigen::Index j = 0; j < d; ++j) x(j) = io::parse_double(f[static_cast<std::size_t>(j + 1)]);
    const Output y = f.back().empty() ? kMissing : Output(io::parse_double(f.back()));
    (f.front() == "P" ? r.population : r.archive).push_back(std::move(x), y);
  }
  return r;
}

}  // namespace elas::pipeline

#endif  // ELAS_PIPELINE_STORE_HPP
