// Command-line driver for the experiment pipeline.
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "elas/pipeline/analyze.hpp"
#include "elas/pipeline/commands.hpp"

namespace {

enum Exit { kOk = 0, kFatal = 1, kConfig = 2, kPartial = 3 };

}  // namespace

int main(int argc, char** argv) {
  using namespace elas;
  CLI::App app{"Landscape features vs. surrogate model errors: experiment pipeline"};
  app.require_subcommand(1, 1);
  std::string config_path, out_dir;
  const std::pair<const char*, const char*> commands[] = {
      {"generate", "run CMA-ES and store states, archives and resamples"},
      {"features", "compute landscape features on every stored resample"},
      {"evaluate", "train and score every model under every selection method"},
      {"split", "split the error table into validation and test parts"},
      {"analyze", "feature screening, clustering and model comparison reports"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "experiment configuration (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  pipeline::ExperimentConfig cfg;
  try {
    cfg = pipeline::config_from_json(nlohmann::json::parse(io::read_file(config_path)));
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  }
  if (!out_dir.empty()) cfg.out = out_dir;
  const std::filesystem::path out = cfg.out;

  try {
    pipeline::StageResult r;
    if (command == "generate") r = pipeline::cmd_generate(cfg, out);
    else if (command == "features") r = pipeline::cmd_features(cfg, out);
    else if (command == "evaluate") r = pipeline::cmd_evaluate(cfg, out);
    else if (command == "split") r = pipeline::cmd_split(cfg, out);
    else r = pipeline::cmd_analyze(cfg, out);
    pipeline::record_failures(out, r);
    if (!r.ok()) {
      std::cerr << command << ": " << r.failures.size() << " task(s) failed; see "
                << pipeline::failure_manifest_path(out).string() << "\n";
      return kPartial;
    }
    std::cout << command << ": done (" << pipeline::thread_count() << " thread(s))\n";
    return kOk;
  } catch (const Error& e) {
    std::cerr << command << ": " << e.what() << "\n";
    return e.code() == ErrorCode::Config ? kConfig : kFatal;
  } catch (const std::exception& e) {
    std::cerr << command << ": " << e.what() << "\n";
    return kFatal;
  }
}
