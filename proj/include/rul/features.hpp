// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rul/pipeline.hpp"

namespace rul::features {

/// Dense [n x d] row-major feature matrix with named columns.
struct FeatureMatrix {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> values;
  std::vector<std::string> column_names;

  const double* row(std::size_t i) const { return values.data() + i * d; }
  double* row(std::size_t i) { return values.data() + i * d; }
};

/// Five statistics for one window column-major into out[5*c..5*c+4]:
/// mean, population std, last, delta (last - first), least-squares slope
/// against step indices 0..T-1.
void window_statistics(const double* window, std::size_t T, std::size_t channels, double* out);

/// Engineered features for every window: d = 5 * channels, column order per
/// sensor (kept order) is mean, std, last, delta, slope.
FeatureMatrix engineer(const pipeline::WindowSet& ws,
                       const std::vector<std::string>& sensor_names);

/// Flatten windows time-major (step 1 sensors, then step 2 sensors, ...).
FeatureMatrix flatten_windows(const pipeline::WindowSet& ws,
                              const std::vector<std::string>& sensor_names);

/// Degree-2 expansion: all linear terms, then squares and pairwise products
/// (i <= j, lexicographic). No constant column. Width d + d(d+1)/2.
FeatureMatrix polynomial_expand(const FeatureMatrix& f);

/// Column-wise z-score over feature rows, reusing the pipeline Scaler type.
pipeline::Scaler fit_feature_scaler(const FeatureMatrix& f);
FeatureMatrix apply_feature_scaler(const pipeline::Scaler& scaler, const FeatureMatrix& f);

void write_csv(const FeatureMatrix& f, const std::string& path, std::uint64_t config_hash);

/// Binary cache with labels and engine ids alongside the matrix.
void save_features(const FeatureMatrix& f, std::span<const double> y,
                   std::span<const int> engine_of, const std::string& path,
                   std::uint64_t config_hash);
struct LabeledFeatures {
  FeatureMatrix f;
  std::vector<double> y;
  std::vector<int> engine_of;
};
LabeledFeatures load_features(const std::string& path, std::uint64_t expected_hash);

}  // namespace rul::features
