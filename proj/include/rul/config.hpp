// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rul/cmapss.hpp"
#include "rul/gbdt.hpp"
#include "rul/models.hpp"
#include "rul/pipeline.hpp"

namespace rul::config {

/// Flat "[section] key = value" text. '#' and ';' start comments. Later keys
/// override earlier ones; command-line --set overrides take final say.
struct KeyValues {
  std::map<std::string, std::string> entries;  // "section.key" -> value

  bool has(const std::string& dotted) const { return entries.count(dotted) != 0; }
  std::string get(const std::string& dotted, const std::string& fallback) const;
  double get_double(const std::string& dotted, double fallback) const;
  int get_int(const std::string& dotted, int fallback) const;
  std::uint64_t get_u64(const std::string& dotted, std::uint64_t fallback) const;
};

KeyValues parse_config_text(const std::string& text);
KeyValues parse_config_file(const std::string& path);

/// "section.key=value" from the command line.
void apply_override(KeyValues& kv, const std::string& assignment);

struct ExperimentConfig {
  cmapss::SubsetId subset = cmapss::SubsetId::SYNTH;
  std::string data_root;  // falls back to $RUL_DATA_DIR
  std::string out_dir = "out";
  std::string model = "lstm";  // raw_ridge|ridge_fe|poly_ridge|gbdt|cnn|lstm
  std::uint64_t seed = 42;

  pipeline::RulConfig rul;
  std::size_t window = 30;
  double split_ratio = 0.8;

  double ridge_alpha = 1.0;
  gbdt::GbdtConfig gbdt;
  models::TrainConfig train;
  cmapss::SyntheticSpec synth;

  int hidden_engine = 0;    // 0 = longest test engine
  int hidden_windows = 150;
  std::vector<int> ablation_removals = {0, 5, 10, 15};

  /// Hash of everything that shapes the cached windows/features.
  std::uint64_t prepare_hash() const;
  /// Hash of the full experiment (prepare fields + model + model settings).
  std::uint64_t config_hash() const;
};

ExperimentConfig experiment_from(const KeyValues& kv);

bool valid_model_name(const std::string& name);

}  // namespace rul::config
