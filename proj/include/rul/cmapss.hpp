// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace rul::cmapss {

inline constexpr int kNumSettings = 3;
inline constexpr int kNumSensors = 21;

/// One line of a C-MAPSS file: engine id, cycle, 3 settings, 21 sensors.
struct RawRow {
  int engine_id = 0;
  int cycle = 0;
  std::array<double, kNumSettings> settings{};
  std::array<double, kNumSensors> sensors{};

  bool operator==(const RawRow&) const = default;
};

/// One engine's ordered trajectory; cycles run 1..rows.size() consecutively.
struct EngineSeries {
  int engine_id = 0;
  std::vector<RawRow> rows;

  std::size_t length() const { return rows.size(); }
  bool operator==(const EngineSeries&) const = default;
};

enum class SubsetId { FD001, FD003, SYNTH };

std::string to_string(SubsetId id);
SubsetId subset_from_string(const std::string& name);

struct DatasetBundle {
  SubsetId subset_id = SubsetId::SYNTH;
  std::vector<EngineSeries> train;
  std::vector<EngineSeries> test;
  std::vector<int> test_rul;  // true RUL at each test engine's final cycle

  bool operator==(const DatasetBundle&) const = default;
};

enum class DriftKind { mixed, linear, exponential };

/// Parameters for dataset-free synthetic degradation data.
struct SyntheticSpec {
  int n_engines = 100;
  int n_sensors = 21;        // active channels; columns beyond this are zero
  int min_life = 128;
  int max_life = 362;
  double noise_std = 0.01;
  std::uint64_t seed = 42;
  std::vector<int> constant_sensors;  // 1-based indices emitted constant
  DriftKind drift = DriftKind::mixed;
};

/// Parse a run-to-failure training file. Rows must be grouped by engine with
/// cycles counting 1,2,3,... inside each group.
std::vector<EngineSeries> parse_train(std::istream& text);

/// Parse a test file plus its one-integer-per-line RUL label file.
std::pair<std::vector<EngineSeries>, std::vector<int>> parse_test(std::istream& data_text,
                                                                  std::istream& rul_text);

DatasetBundle generate_synthetic(const SyntheticSpec& spec);

/// Serialize back to the 26-column text format (shortest round-trip doubles).
void write_series(std::ostream& out, const std::vector<EngineSeries>& series);
void write_rul(std::ostream& out, const std::vector<int>& labels);

/// Load train_<subset>.txt, test_<subset>.txt, RUL_<subset>.txt from data_root.
/// Enforces the 100/100 engine counts for FD001/FD003.
DatasetBundle load_bundle(SubsetId subset, const std::string& data_root);

}  // namespace rul::cmapss
