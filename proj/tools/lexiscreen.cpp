// lexiscreen: batch reading-skill screening from recordings.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lexiscreen/config.hpp"
#include "lexiscreen/error.hpp"
#include "lexiscreen/pipeline.hpp"

namespace ls = lexiscreen;

int main(int argc, char** argv) {
  CLI::App app{"Reading-skill screening from oral-reading recordings"};
  app.require_subcommand(1);
  std::string config_file;
  std::vector<std::string> sets;
  int jobs = ls::default_jobs();
  app.add_option("-c,--config", config_file, "key = value configuration file");
  app.add_option("--set", sets, "Override one setting, key=value (repeatable)");
  app.add_option("-j,--jobs", jobs, "Worker threads for featurize")->check(CLI::PositiveNumber);
  bool dump = false;

  auto* featurize = app.add_subcommand("featurize", "Extract the acoustic feature table");
  ls::FeaturizeDumps dumps;
  featurize->add_flag("--dump-frames", dumps.frames, "Write <out>/dumps/<id>.frames.csv");
  featurize->add_flag("--dump-events", dumps.events, "Write <out>/dumps/<id>.events.csv");
  auto* cluster = app.add_subcommand("cluster", "Cluster lexical miscue profiles into skill classes");
  auto* train = app.add_subcommand("train", "Train the first configured plan on all labeled rows");
  auto* evaluate = app.add_subcommand("evaluate", "Cross-validate every configured plan");
  auto* predict = app.add_subcommand("predict", "Classify feature rows with a trained model");
  auto* asr = app.add_subcommand("asr-align", "Score ASR hypotheses against the story text");
  auto* report = app.add_subcommand("report", "Summarize evaluation outputs");
  auto* config = app.add_subcommand("config", "Show the effective configuration");
  config->add_flag("--dump", dump, "Print every key with its value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    ls::RunConfig cfg;
    if (!config_file.empty()) cfg = ls::load_config(config_file);
    for (const auto& s : sets) ls::apply_assignment(cfg, s);
    ls::validate(cfg);

    if (config->parsed()) {
      std::cout << ls::dump_config(cfg);
      return 0;
    }
    if (featurize->parsed()) return ls::cmd_featurize(cfg, jobs, std::cout, dumps);
    if (cluster->parsed()) return ls::cmd_cluster(cfg, std::cout);
    if (train->parsed()) return ls::cmd_train(cfg, std::cout);
    if (evaluate->parsed()) return ls::cmd_evaluate(cfg, std::cout);
    if (predict->parsed()) return ls::cmd_predict(cfg, std::cout);
    if (asr->parsed()) return ls::cmd_asr_align(cfg, std::cout);
    if (report->parsed()) return ls::cmd_report(cfg, std::cout);
  } catch (const ls::Error& e) {
    std::cerr << "error: " << ls::to_string(e.code()) << ": " << e.what() << "\n";
    return 2;
  }
  return 0;
}
