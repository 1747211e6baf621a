// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rul/cmapss.hpp"

namespace rul::pipeline {

struct RulConfig {
  int max_rul = 130;
};

/// Kept sensor indices, 1-based (s1..s21), strictly increasing.
struct SensorSelection {
  std::vector<int> kept;

  std::size_t count() const { return kept.size(); }
  std::vector<std::string> names() const;
};

/// Per-sensor mean and population std, fitted on training rows only.
/// fitted_rows records how many rows entered the fit (leakage instrumentation).
struct Scaler {
  std::vector<double> mean;
  std::vector<double> std;
  std::size_t fitted_rows = 0;
};

struct EngineSplit {
  std::vector<int> train_ids;
  std::vector<int> val_ids;
  std::uint64_t seed = 0;
};

/// A z-scored trajectory, [length x channels] row-major. Producing this type
/// via apply_scaler is the only way to get normalized data, so a series can
/// not be normalized twice.
struct NormalizedSeries {
  int engine_id = 0;
  std::size_t length = 0;
  std::size_t channels = 0;
  std::vector<double> values;

  double at(std::size_t t, std::size_t c) const { return values[t * channels + c]; }
};

/// Stacked fixed-length windows: x is [n, window, channels] row-major,
/// y holds the capped RUL at each window's final step.
struct WindowSet {
  std::size_t n = 0;
  std::size_t window = 30;
  std::size_t channels = 0;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<int> engine_of;

  const double* window_at(std::size_t i) const { return x.data() + i * window * channels; }
  double* window_at(std::size_t i) { return x.data() + i * window * channels; }
};

/// min(L - t, max_rul) per cycle t; the final entry is always 0.
std::vector<double> compute_rul_labels(const cmapss::EngineSeries& series, const RulConfig& cfg);

/// FD001 drops {s1,s5,s6,s10,s16,s18,s19}; FD003 drops {s1,s5,s10,s16,s18,s19};
/// SYNTH drops sensors whose training variance is below 1e-12.
SensorSelection select_sensors(const cmapss::DatasetBundle& bundle);

Scaler fit_scaler(std::span<const cmapss::EngineSeries> train, const SensorSelection& sel);

NormalizedSeries apply_scaler(const Scaler& scaler, const SensorSelection& sel,
                              const cmapss::EngineSeries& series);

/// Seeded Fisher-Yates over the ids as given, then prefix split with
/// round(ratio * n) training engines.
EngineSplit split_engines(const std::vector<int>& ids, double ratio, std::uint64_t seed);

/// Stride-1 windows over each trajectory; engines shorter than `window` are
/// skipped. Output is ordered by (position of series in input, window start).
WindowSet make_windows(std::span<const NormalizedSeries> series,
                       std::span<const std::vector<double>> labels, std::size_t window = 30,
                       std::size_t stride = 1);

/// One window per test engine: the final `window` cycles, front-padded with
/// zeros (normalized space) when the trajectory is shorter. Labels are the
/// given true RULs capped at cfg.max_rul.
WindowSet make_test_windows(std::span<const cmapss::EngineSeries> test,
                            std::span<const int> test_rul, const SensorSelection& sel,
                            const Scaler& scaler, const RulConfig& cfg,
                            std::size_t window = 30);

/// Binary cache: magic, config hash, shape triple, then x / y / engine_of.
void save_windows(const WindowSet& ws, const std::string& path, std::uint64_t config_hash);
WindowSet load_windows(const std::string& path, std::uint64_t expected_hash);

}  // namespace rul::pipeline
