// SPDX-License-Identifier: Apache-2.0
#include "rul/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rul/errors.hpp"
#include "rul/rng.hpp"

namespace rul::config {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    out.push_back(std::stoi(tok));
  }
  return out;
}

}  // namespace

std::string KeyValues::get(const std::string& dotted, const std::string& fallback) const {
  auto it = entries.find(dotted);
  return it == entries.end() ? fallback : it->second;
}

double KeyValues::get_double(const std::string& dotted, double fallback) const {
  auto it = entries.find(dotted);
  if (it == entries.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw ConfigError("config key " + dotted + ": '" + it->second + "' is not a number");
  }
}

int KeyValues::get_int(const std::string& dotted, int fallback) const {
  auto it = entries.find(dotted);
  if (it == entries.end()) return fallback;
  try {
    return std::stoi(it->second);
  } catch (const std::exception&) {
    throw ConfigError("config key " + dotted + ": '" + it->second + "' is not an integer");
  }
}

std::uint64_t KeyValues::get_u64(const std::string& dotted, std::uint64_t fallback) const {
  auto it = entries.find(dotted);
  if (it == entries.end()) return fallback;
  try {
    return std::stoull(it->second);
  } catch (const std::exception&) {
    throw ConfigError("config key " + dotted + ": '" + it->second + "' is not an integer");
  }
}

KeyValues parse_config_text(const std::string& text) {
  KeyValues kv;
  std::stringstream ss(text);
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const std::size_t comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("bad section header at line " + std::to_string(line_no));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value at line " + std::to_string(line_no));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key at line " + std::to_string(line_no));
    kv.entries[section.empty() ? key : section + "." + key] = value;
  }
  return kv;
}

KeyValues parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

void apply_override(KeyValues& kv, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must look like section.key=value: " + assignment);
  kv.entries[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

bool valid_model_name(const std::string& name) {
  return name == "raw_ridge" || name == "ridge_fe" || name == "poly_ridge" || name == "gbdt" ||
         name == "cnn" || name == "lstm";
}

ExperimentConfig experiment_from(const KeyValues& kv) {
  ExperimentConfig cfg;
  cfg.subset = cmapss::subset_from_string(kv.get("experiment.subset", "SYNTH"));
  cfg.model = kv.get("experiment.model", "lstm");
  if (!valid_model_name(cfg.model))
    throw ConfigError("unknown model '" + cfg.model +
                      "' (expected raw_ridge, ridge_fe, poly_ridge, gbdt, cnn, or lstm)");
  const char* env_root = std::getenv("RUL_DATA_DIR");
  cfg.data_root = kv.get("experiment.data_root", env_root ? env_root : "");
  cfg.out_dir = kv.get("experiment.out_dir", "out");
  cfg.seed = kv.get_u64("experiment.seed", 42);

  cfg.rul.max_rul = kv.get_int("pipeline.max_rul", 130);
  cfg.window = static_cast<std::size_t>(kv.get_int("pipeline.window", 30));
  cfg.split_ratio = kv.get_double("pipeline.split_ratio", 0.8);

  cfg.ridge_alpha = kv.get_double("ridge.alpha", 1.0);

  cfg.gbdt.n_estimators = kv.get_int("gbdt.n_estimators", 500);
  cfg.gbdt.max_depth = kv.get_int("gbdt.max_depth", 6);
  cfg.gbdt.learning_rate = kv.get_double("gbdt.learning_rate", 0.05);
  cfg.gbdt.subsample = kv.get_double("gbdt.subsample", 0.8);
  cfg.gbdt.colsample_bytree = kv.get_double("gbdt.colsample_bytree", 0.8);
  cfg.gbdt.early_stopping_patience = kv.get_int("gbdt.early_stopping_patience", 20);
  cfg.gbdt.lambda_l2 = kv.get_double("gbdt.lambda_l2", 1.0);
  cfg.gbdt.min_child_weight = kv.get_double("gbdt.min_child_weight", 1.0);
  cfg.gbdt.seed = cfg.seed;

  cfg.train.batch_size = static_cast<std::size_t>(kv.get_int("train.batch_size", 64));
  cfg.train.lr = kv.get_double("train.lr", 0.001);
  cfg.train.weight_decay = kv.get_double("train.weight_decay", 1e-5);
  cfg.train.max_epochs = kv.get_int("train.max_epochs", 200);
  cfg.train.sched_factor = kv.get_double("train.sched_factor", 0.5);
  cfg.train.sched_patience = kv.get_int("train.sched_patience", 5);
  cfg.train.early_patience = kv.get_int("train.early_patience", 20);
  cfg.train.seed = cfg.seed;

  cfg.synth.n_engines = kv.get_int("synth.n_engines", 100);
  cfg.synth.n_sensors = kv.get_int("synth.n_sensors", 21);
  cfg.synth.min_life = kv.get_int("synth.min_life", 128);
  cfg.synth.max_life = kv.get_int("synth.max_life", 362);
  cfg.synth.noise_std = kv.get_double("synth.noise_std", 0.01);
  cfg.synth.seed = kv.get_u64("synth.seed", cfg.seed);
  if (kv.has("synth.constant_sensors"))
    cfg.synth.constant_sensors = parse_int_list(kv.get("synth.constant_sensors", ""));
  const std::string drift = kv.get("synth.drift", "mixed");
  if (drift == "mixed")
    cfg.synth.drift = cmapss::DriftKind::mixed;
  else if (drift == "linear")
    cfg.synth.drift = cmapss::DriftKind::linear;
  else if (drift == "exponential")
    cfg.synth.drift = cmapss::DriftKind::exponential;
  else
    throw ConfigError("synth.drift must be mixed, linear, or exponential");

  cfg.hidden_engine = kv.get_int("analyze.hidden_engine", 0);
  cfg.hidden_windows = kv.get_int("analyze.hidden_windows", 150);
  if (kv.has("analyze.ablation_removals"))
    cfg.ablation_removals = parse_int_list(kv.get("analyze.ablation_removals", ""));
  return cfg;
}

namespace {

void hash_kv(std::string& buf, const std::string& key, const std::string& value) {
  buf += key;
  buf += '=';
  buf += value;
  buf += '\n';
}

std::string prepare_canonical(const ExperimentConfig& c) {
  std::string buf;
  hash_kv(buf, "subset", cmapss::to_string(c.subset));
  hash_kv(buf, "seed", std::to_string(c.seed));
  hash_kv(buf, "max_rul", std::to_string(c.rul.max_rul));
  hash_kv(buf, "window", std::to_string(c.window));
  hash_kv(buf, "split_ratio", std::to_string(c.split_ratio));
  if (c.subset == cmapss::SubsetId::SYNTH) {
    hash_kv(buf, "synth.n_engines", std::to_string(c.synth.n_engines));
    hash_kv(buf, "synth.n_sensors", std::to_string(c.synth.n_sensors));
    hash_kv(buf, "synth.min_life", std::to_string(c.synth.min_life));
    hash_kv(buf, "synth.max_life", std::to_string(c.synth.max_life));
    hash_kv(buf, "synth.noise_std", std::to_string(c.synth.noise_std));
    hash_kv(buf, "synth.seed", std::to_string(c.synth.seed));
    std::string cs;
    for (int s : c.synth.constant_sensors) cs += std::to_string(s) + ",";
    hash_kv(buf, "synth.constant_sensors", cs);
    hash_kv(buf, "synth.drift", std::to_string(static_cast<int>(c.synth.drift)));
  }
  return buf;
}

}  // namespace

std::uint64_t ExperimentConfig::prepare_hash() const { return fnv1a(prepare_canonical(*this)); }

std::uint64_t ExperimentConfig::config_hash() const {
  std::string buf = prepare_canonical(*this);
  hash_kv(buf, "model", model);
  if (model == "raw_ridge" || model == "ridge_fe" || model == "poly_ridge") {
    hash_kv(buf, "ridge.alpha", std::to_string(ridge_alpha));
  } else if (model == "gbdt") {
    hash_kv(buf, "gbdt.n_estimators", std::to_string(gbdt.n_estimators));
    hash_kv(buf, "gbdt.max_depth", std::to_string(gbdt.max_depth));
    hash_kv(buf, "gbdt.learning_rate", std::to_string(gbdt.learning_rate));
    hash_kv(buf, "gbdt.subsample", std::to_string(gbdt.subsample));
    hash_kv(buf, "gbdt.colsample_bytree", std::to_string(gbdt.colsample_bytree));
    hash_kv(buf, "gbdt.patience", std::to_string(gbdt.early_stopping_patience));
    hash_kv(buf, "gbdt.lambda_l2", std::to_string(gbdt.lambda_l2));
    hash_kv(buf, "gbdt.min_child_weight", std::to_string(gbdt.min_child_weight));
  } else {
    hash_kv(buf, "train.batch_size", std::to_string(train.batch_size));
    hash_kv(buf, "train.lr", std::to_string(train.lr));
    hash_kv(buf, "train.weight_decay", std::to_string(train.weight_decay));
    hash_kv(buf, "train.max_epochs", std::to_string(train.max_epochs));
    hash_kv(buf, "train.sched_factor", std::to_string(train.sched_factor));
    hash_kv(buf, "train.sched_patience", std::to_string(train.sched_patience));
    hash_kv(buf, "train.early_patience", std::to_string(train.early_patience));
  }
  return fnv1a(buf);
}

}  // namespace rul::config
