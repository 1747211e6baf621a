// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rul::metrics {

double rmse(std::span<const double> pred, std::span<const double> truth);
double mae(std::span<const double> pred, std::span<const double> truth);

/// 1 - SSE/SST. Throws ValueError when the truth vector is constant.
double r2(std::span<const double> pred, std::span<const double> truth);

/// Asymmetric penalty for a single error h = predicted - true.
double nasa_term(double h);

/// Sum of nasa_term over all engines. Overestimation (h > 0) costs more.
double nasa_score(std::span<const double> pred, std::span<const double> truth);

struct EngineRow {
  int engine_id = 0;
  double y_true = 0.0;
  double y_pred = 0.0;
  double h = 0.0;  // y_pred - y_true
};

struct EvalReport {
  double rmse = 0.0;
  double mae = 0.0;
  double r2 = 0.0;
  double nasa_score = 0.0;
  std::vector<EngineRow> rows;  // ordered by engine_id
};

EvalReport evaluate(std::span<const double> pred, std::span<const double> truth,
                    std::span<const int> engine_ids);

/// Summary JSON text with deterministic key order and round-trip doubles.
std::string report_to_json(const EvalReport& report, const std::string& subset,
                           const std::string& model, std::uint64_t config_hash);

}  // namespace rul::metrics
