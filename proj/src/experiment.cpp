// SPDX-License-Identifier: Apache-2.0
#include "rul/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "rul/errors.hpp"
#include "rul/gbdt.hpp"
#include "rul/models.hpp"
#include "rul/ridge.hpp"

#include "json.hpp"

namespace rul::experiment {

namespace fs = std::filesystem;

namespace {

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string cache_base(const config::ExperimentConfig& cfg) {
  return cfg.out_dir + "/cache/" + cmapss::to_string(cfg.subset) + "_" +
         hash_hex(cfg.prepare_hash());
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw StructuralError("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw StructuralError("cannot write " + path);
  f << text;
}

cmapss::DatasetBundle load_or_generate(const config::ExperimentConfig& cfg) {
  if (cfg.subset == cmapss::SubsetId::SYNTH) return cmapss::generate_synthetic(cfg.synth);
  if (cfg.data_root.empty())
    throw ConfigError("no data root configured; set experiment.data_root or RUL_DATA_DIR");
  return cmapss::load_bundle(cfg.subset, cfg.data_root);
}

struct ClassicalInputs {
  features::FeatureMatrix train, val, test;
  pipeline::Scaler feat_scaler;  // fitted on the training rows
};

// raw mode flattens windows; fe/poly/gbdt use the engineered statistics.
// All modes z-score with a scaler fitted on the training rows; poly expands
// after normalization.
ClassicalInputs classical_inputs(const std::string& model, const PreparedData& data) {
  ClassicalInputs in;
  features::FeatureMatrix train_raw, val_raw, test_raw;
  if (model == "raw_ridge") {
    const auto names = data.selection.names();
    train_raw = features::flatten_windows(data.train_w, names);
    val_raw = features::flatten_windows(data.val_w, names);
    test_raw = features::flatten_windows(data.test_w, names);
  } else {
    train_raw = data.train_feat.f;
    val_raw = data.val_feat.f;
    test_raw = data.test_feat.f;
  }
  in.feat_scaler = features::fit_feature_scaler(train_raw);
  in.train = features::apply_feature_scaler(in.feat_scaler, train_raw);
  in.val = features::apply_feature_scaler(in.feat_scaler, val_raw);
  in.test = features::apply_feature_scaler(in.feat_scaler, test_raw);
  if (model == "poly_ridge") {
    in.train = features::polynomial_expand(in.train);
    in.val = features::polynomial_expand(in.val);
    in.test = features::polynomial_expand(in.test);
  }
  return in;
}

nlohmann::ordered_json scaler_to_json(const pipeline::Scaler& s) {
  return {{"mean", s.mean}, {"std", s.std}, {"fitted_rows", s.fitted_rows}};
}

pipeline::Scaler scaler_from_json(const nlohmann::json& j) {
  pipeline::Scaler s;
  s.mean = j.at("mean").get<std::vector<double>>();
  s.std = j.at("std").get<std::vector<double>>();
  s.fitted_rows = j.at("fitted_rows").get<std::size_t>();
  return s;
}

}  // namespace

OutputPaths output_paths(const config::ExperimentConfig& cfg) {
  const std::string base =
      cfg.out_dir + "/" + cmapss::to_string(cfg.subset) + "_" + cfg.model;
  OutputPaths p;
  const bool neural = cfg.model == "cnn" || cfg.model == "lstm";
  p.model_file = neural ? base + ".ckpt" : base + "_model.json";
  p.report_json = base + "_report.json";
  p.predictions_csv = base + "_predictions.csv";
  p.loss_csv = base + "_loss.csv";
  p.hidden_csv = base + "_hidden.csv";
  p.ablation_csv = base + "_ablation.csv";
  return p;
}

PreparedData prepare(const config::ExperimentConfig& cfg, bool* cache_hit) {
  fs::create_directories(cfg.out_dir + "/cache");
  const std::string base = cache_base(cfg);
  const std::uint64_t hash = cfg.prepare_hash();
  const std::string meta_path = base + "_meta.json";

  const std::vector<std::string> kinds = {"train", "val", "test"};
  bool have_all = fs::exists(meta_path);
  for (const std::string& k : kinds)
    have_all = have_all && fs::exists(base + "_" + k + ".win") &&
               fs::exists(base + "_" + k + ".feat");

  PreparedData data;
  if (have_all) {
    const auto meta = nlohmann::json::parse(read_file(meta_path));
    if (meta.at("prepare_hash").get<std::string>() == hash_hex(hash)) {
      if (cache_hit) *cache_hit = true;
      std::printf("prepare: cache hit (%s)\n", base.c_str());
      data.selection.kept = meta.at("kept_sensors").get<std::vector<int>>();
      data.sensor_scaler = scaler_from_json(meta.at("sensor_scaler"));
      data.split.train_ids = meta.at("train_ids").get<std::vector<int>>();
      data.split.val_ids = meta.at("val_ids").get<std::vector<int>>();
      data.split.seed = cfg.seed;
      data.train_w = pipeline::load_windows(base + "_train.win", hash);
      data.val_w = pipeline::load_windows(base + "_val.win", hash);
      data.test_w = pipeline::load_windows(base + "_test.win", hash);
      data.train_feat = features::load_features(base + "_train.feat", hash);
      data.val_feat = features::load_features(base + "_val.feat", hash);
      data.test_feat = features::load_features(base + "_test.feat", hash);
      return data;
    }
  }
  if (cache_hit) *cache_hit = false;

  const cmapss::DatasetBundle bundle = load_or_generate(cfg);
  data.selection = pipeline::select_sensors(bundle);

  std::vector<int> ids;
  for (const auto& e : bundle.train) ids.push_back(e.engine_id);
  data.split = pipeline::split_engines(ids, cfg.split_ratio, cfg.seed);

  const std::set<int> train_ids(data.split.train_ids.begin(), data.split.train_ids.end());
  std::vector<cmapss::EngineSeries> train_series, val_series;
  for (const auto& e : bundle.train)
    (train_ids.count(e.engine_id) ? train_series : val_series).push_back(e);

  data.sensor_scaler = pipeline::fit_scaler(train_series, data.selection);

  auto windows_of = [&](const std::vector<cmapss::EngineSeries>& series) {
    std::vector<pipeline::NormalizedSeries> norm;
    std::vector<std::vector<double>> labels;
    for (const auto& e : series) {
      norm.push_back(pipeline::apply_scaler(data.sensor_scaler, data.selection, e));
      labels.push_back(pipeline::compute_rul_labels(e, cfg.rul));
    }
    return pipeline::make_windows(norm, labels, cfg.window);
  };
  data.train_w = windows_of(train_series);
  data.val_w = windows_of(val_series);
  data.test_w = pipeline::make_test_windows(bundle.test, bundle.test_rul, data.selection,
                                            data.sensor_scaler, cfg.rul, cfg.window);

  const auto names = data.selection.names();
  data.train_feat = {features::engineer(data.train_w, names), data.train_w.y,
                     data.train_w.engine_of};
  data.val_feat = {features::engineer(data.val_w, names), data.val_w.y, data.val_w.engine_of};
  data.test_feat = {features::engineer(data.test_w, names), data.test_w.y,
                    data.test_w.engine_of};

  pipeline::save_windows(data.train_w, base + "_train.win", hash);
  pipeline::save_windows(data.val_w, base + "_val.win", hash);
  pipeline::save_windows(data.test_w, base + "_test.win", hash);
  features::save_features(data.train_feat.f, data.train_feat.y, data.train_feat.engine_of,
                          base + "_train.feat", hash);
  features::save_features(data.val_feat.f, data.val_feat.y, data.val_feat.engine_of,
                          base + "_val.feat", hash);
  features::save_features(data.test_feat.f, data.test_feat.y, data.test_feat.engine_of,
                          base + "_test.feat", hash);

  nlohmann::ordered_json meta;
  meta["prepare_hash"] = hash_hex(hash);
  meta["subset"] = cmapss::to_string(cfg.subset);
  meta["kept_sensors"] = data.selection.kept;
  meta["sensor_scaler"] = scaler_to_json(data.sensor_scaler);
  meta["train_ids"] = data.split.train_ids;
  meta["val_ids"] = data.split.val_ids;
  write_file(meta_path, meta.dump(2) + "\n");
  std::printf("prepare: built caches (%s)\n", base.c_str());
  return data;
}

std::string train_model(const config::ExperimentConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  const PreparedData data = prepare(cfg);
  const OutputPaths paths = output_paths(cfg);
  const std::uint64_t hash = cfg.config_hash();

  if (cfg.model == "cnn" || cfg.model == "lstm") {
    models::TrainConfig tc = cfg.train;
    models::TrainReport report;
    if (cfg.model == "cnn") {
      models::CnnModel model = models::build_cnn(data.train_w.channels, cfg.seed);
      report = models::train(model, data.train_w, data.val_w, tc);
      models::save_checkpoint(model, paths.model_file, hash);
    } else {
      models::LstmModel model = models::build_lstm(data.train_w.channels, cfg.seed);
      report = models::train(model, data.train_w, data.val_w, tc);
      models::save_checkpoint(model, paths.model_file, hash);
    }
    models::write_train_report_csv(report, paths.loss_csv, hash);
    std::printf("train: %s stopped at epoch %d (best %d), wall %.1fs\n", cfg.model.c_str(),
                report.stopped_epoch, report.best_epoch, report.wall_seconds);
    return paths.model_file;
  }

  const ClassicalInputs in = classical_inputs(cfg.model, data);
  nlohmann::ordered_json j;
  j["config_hash"] = hash_hex(hash);
  j["mode"] = cfg.model;
  j["feature_scaler"] = scaler_to_json(in.feat_scaler);
  if (cfg.model == "gbdt") {
    gbdt::GbdtConfig gc = cfg.gbdt;
    const gbdt::GbdtModel model =
        gbdt::fit(in.train, data.train_feat.y, in.val, data.val_feat.y, gc);
    j["type"] = "gbdt";
    j["model"] = nlohmann::ordered_json::parse(gbdt::to_json(model));
    std::printf("train: gbdt grew %zu trees (best round %d)\n", model.trees.size(),
                model.best_round);
  } else {
    const ridge::RidgeModel model = ridge::fit(in.train, data.train_feat.y, cfg.ridge_alpha);
    j["type"] = "ridge";
    j["model"] = nlohmann::ordered_json::parse(ridge::to_json(model));
    std::printf("train: %s solved %zu-wide normal equations\n", cfg.model.c_str(), in.train.d);
  }
  write_file(paths.model_file, j.dump() + "\n");
  return paths.model_file;
}

metrics::EvalReport evaluate_model(const config::ExperimentConfig& cfg,
                                   const std::string& model_path) {
  fs::create_directories(cfg.out_dir);
  const PreparedData data = prepare(cfg);
  const OutputPaths paths = output_paths(cfg);
  const std::uint64_t hash = cfg.config_hash();

  std::vector<double> pred;
  if (cfg.model == "cnn" || cfg.model == "lstm") {
    if (models::checkpoint_kind(model_path) !=
        (cfg.model == "cnn" ? models::ModelKind::cnn : models::ModelKind::lstm))
      throw ConfigError(model_path + " does not match configured model " + cfg.model);
    if (cfg.model == "cnn") {
      const models::CnnModel model = models::load_cnn_checkpoint(model_path);
      pred = models::predict_rul(model, data.test_w);
    } else {
      const models::LstmModel model = models::load_lstm_checkpoint(model_path);
      pred = models::predict_rul(model, data.test_w);
    }
  } else {
    const auto j = nlohmann::json::parse(read_file(model_path));
    const std::string mode = j.at("mode").get<std::string>();
    if (mode != cfg.model)
      throw ConfigError(model_path + " holds a '" + mode + "' model, config wants " + cfg.model);
    const pipeline::Scaler feat_scaler = scaler_from_json(j.at("feature_scaler"));
    const auto names = data.selection.names();
    features::FeatureMatrix test_raw = (cfg.model == "raw_ridge")
                                           ? features::flatten_windows(data.test_w, names)
                                           : data.test_feat.f;
    features::FeatureMatrix test = features::apply_feature_scaler(feat_scaler, test_raw);
    if (cfg.model == "poly_ridge") test = features::polynomial_expand(test);
    if (j.at("type").get<std::string>() == "gbdt")
      pred = gbdt::predict(gbdt::from_json(j.at("model").dump()), test);
    else
      pred = ridge::predict(ridge::from_json(j.at("model").dump()), test);
  }

  const metrics::EvalReport report = metrics::evaluate(pred, data.test_w.y, data.test_w.engine_of);
  write_file(paths.report_json,
             metrics::report_to_json(report, cmapss::to_string(cfg.subset), cfg.model, hash));
  analysis::export_predictions(report, paths.predictions_csv, hash);
  std::printf("evaluate: %s %s RMSE %.3f MAE %.3f R2 %.3f NASA %.1f\n",
              cmapss::to_string(cfg.subset).c_str(), cfg.model.c_str(), report.rmse, report.mae,
              report.r2, report.nasa_score);
  return report;
}

void analyze_model(const config::ExperimentConfig& cfg, const std::string& checkpoint_path) {
  fs::create_directories(cfg.out_dir);
  if (models::checkpoint_kind(checkpoint_path) != models::ModelKind::lstm)
    throw ConfigError("analyze requires an LSTM checkpoint, got " + checkpoint_path);
  const models::LstmModel model = models::load_lstm_checkpoint(checkpoint_path);
  const PreparedData data = prepare(cfg);
  const OutputPaths paths = output_paths(cfg);
  const std::uint64_t hash = cfg.config_hash();

  // Hidden trace over consecutive windows of one test engine.
  const cmapss::DatasetBundle bundle = load_or_generate(cfg);
  const cmapss::EngineSeries* engine = nullptr;
  if (cfg.hidden_engine > 0) {
    for (const auto& e : bundle.test)
      if (e.engine_id == cfg.hidden_engine) engine = &e;
    if (engine == nullptr)
      throw ConfigError("test engine " + std::to_string(cfg.hidden_engine) + " not found");
  } else {
    for (const auto& e : bundle.test)
      if (engine == nullptr || e.length() > engine->length()) engine = &e;
  }
  const auto norm = pipeline::apply_scaler(data.sensor_scaler, data.selection, *engine);
  const auto trace_windows = analysis::consecutive_windows(
      norm, static_cast<std::size_t>(cfg.hidden_windows), cfg.window);
  const auto trace = analysis::hidden_state_trace(model, trace_windows);
  analysis::export_hidden_trace(trace, models::kLstmHidden, paths.hidden_csv, hash);

  const auto ablation = analysis::sequence_ablation(model, data.test_w, cfg.ablation_removals);
  analysis::export_ablation(ablation, paths.ablation_csv, hash);
  std::printf("analyze: engine %d trace (%zu windows), ablation over %zu removals\n",
              engine->engine_id, trace_windows.n, ablation.size());
}

void write_synth_files(const config::ExperimentConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  const cmapss::DatasetBundle bundle = cmapss::generate_synthetic(cfg.synth);
  {
    std::ofstream f(cfg.out_dir + "/train_SYNTH.txt");
    cmapss::write_series(f, bundle.train);
  }
  {
    std::ofstream f(cfg.out_dir + "/test_SYNTH.txt");
    cmapss::write_series(f, bundle.test);
  }
  {
    std::ofstream f(cfg.out_dir + "/RUL_SYNTH.txt");
    cmapss::write_rul(f, bundle.test_rul);
  }
  std::printf("synth: wrote %d train / %d test engines under %s\n", cfg.synth.n_engines,
              cfg.synth.n_engines, cfg.out_dir.c_str());
}

}  // namespace rul::experiment
