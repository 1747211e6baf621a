// SPDX-License-Identifier: Apache-2.0
//
// Command line for the RUL experiment pipeline:
//   rul prepare|train|evaluate|analyze|synth [--config exp.ini] [options]
//
// Exit codes: 0 success, 2 usage/config, 3 data error, 4 numeric failure.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "rul/config.hpp"
#include "rul/errors.hpp"
#include "rul/experiment.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string subset, model, out_dir, data_root;
  std::string seed;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config_path, "config file (INI-style sections)");
  cmd->add_option("--set", args.overrides, "override a config key, e.g. --set train.lr=0.01");
  cmd->add_option("--subset", args.subset, "FD001, FD003, or SYNTH");
  cmd->add_option("--model", args.model, "raw_ridge|ridge_fe|poly_ridge|gbdt|cnn|lstm");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--data-root", args.data_root, "directory with the C-MAPSS text files");
  cmd->add_option("--seed", args.seed, "experiment seed");
}

rul::config::ExperimentConfig resolve(const CommonArgs& args) {
  rul::config::KeyValues kv;
  if (!args.config_path.empty()) kv = rul::config::parse_config_file(args.config_path);
  if (!args.subset.empty()) kv.entries["experiment.subset"] = args.subset;
  if (!args.model.empty()) kv.entries["experiment.model"] = args.model;
  if (!args.out_dir.empty()) kv.entries["experiment.out_dir"] = args.out_dir;
  if (!args.data_root.empty()) kv.entries["experiment.data_root"] = args.data_root;
  if (!args.seed.empty()) kv.entries["experiment.seed"] = args.seed;
  for (const std::string& o : args.overrides) rul::config::apply_override(kv, o);
  return rul::config::experiment_from(kv);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"C-MAPSS remaining-useful-life experiment pipeline"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string model_file;

  CLI::App* prepare = app.add_subcommand("prepare", "build window/feature caches");
  add_common(prepare, args);
  CLI::App* train = app.add_subcommand("train", "train the configured model");
  add_common(train, args);
  CLI::App* evaluate = app.add_subcommand("evaluate", "score a model file on the test set");
  add_common(evaluate, args);
  evaluate->add_option("--model-file", model_file, "model file (default: the train output)");
  CLI::App* analyze = app.add_subcommand("analyze", "LSTM hidden trace + sequence ablation");
  add_common(analyze, args);
  analyze->add_option("--model-file", model_file, "LSTM checkpoint (default: the train output)");
  CLI::App* synth = app.add_subcommand("synth", "write synthetic C-MAPSS-format files");
  add_common(synth, args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const rul::config::ExperimentConfig cfg = resolve(args);
    const auto paths = rul::experiment::output_paths(cfg);
    if (prepare->parsed()) {
      rul::experiment::prepare(cfg);
    } else if (train->parsed()) {
      rul::experiment::train_model(cfg);
    } else if (evaluate->parsed()) {
      rul::experiment::evaluate_model(cfg, model_file.empty() ? paths.model_file : model_file);
    } else if (analyze->parsed()) {
      rul::experiment::analyze_model(cfg, model_file.empty() ? paths.model_file : model_file);
    } else if (synth->parsed()) {
      rul::experiment::write_synth_files(cfg);
    }
    return 0;
  } catch (const rul::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const rul::SolverError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 4;
  } catch (const rul::NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 4;
  } catch (const rul::Error& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
