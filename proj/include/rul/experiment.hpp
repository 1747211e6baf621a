// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "rul/analysis.hpp"
#include "rul/config.hpp"
#include "rul/features.hpp"
#include "rul/metrics.hpp"
#include "rul/pipeline.hpp"

namespace rul::experiment {

struct PreparedData {
  pipeline::SensorSelection selection;
  pipeline::Scaler sensor_scaler;
  pipeline::EngineSplit split;
  pipeline::WindowSet train_w, val_w, test_w;
  // engineered (unnormalized) features; labels/engines ride alongside
  features::LabeledFeatures train_feat, val_feat, test_feat;
};

struct OutputPaths {
  std::string model_file;
  std::string report_json;
  std::string predictions_csv;
  std::string loss_csv;
  std::string hidden_csv;
  std::string ablation_csv;
};

OutputPaths output_paths(const config::ExperimentConfig& cfg);

/// Build (or load from the keyed cache) windows and engineered features.
/// cache_hit reports whether the cache was reused.
PreparedData prepare(const config::ExperimentConfig& cfg, bool* cache_hit = nullptr);

/// Train the configured model; writes the model file (and the loss CSV for
/// neural models). Returns the model file path.
std::string train_model(const config::ExperimentConfig& cfg);

/// Evaluate a model file on the test windows; writes report JSON and the
/// per-engine predictions CSV.
metrics::EvalReport evaluate_model(const config::ExperimentConfig& cfg,
                                   const std::string& model_path);

/// Hidden-state trace and sequence-length ablation for an LSTM checkpoint.
void analyze_model(const config::ExperimentConfig& cfg, const std::string& checkpoint_path);

/// Write train_SYNTH.txt / test_SYNTH.txt / RUL_SYNTH.txt under out_dir.
void write_synth_files(const config::ExperimentConfig& cfg);

}  // namespace rul::experiment
