// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rul/metrics.hpp"
#include "rul/models.hpp"
#include "rul/pipeline.hpp"

namespace rul::analysis {

/// h_T for each window, row-major [ws.n, 32]. Meant for consecutive stride-1
/// windows of a single engine (dropout is always off here).
std::vector<double> hidden_state_trace(const models::LstmModel& model,
                                       const pipeline::WindowSet& ws);

/// All stride-1 windows of one normalized trajectory, keeping the last
/// `max_windows` of them (0 = all). Helper for the hidden-state trace.
pipeline::WindowSet consecutive_windows(const pipeline::NormalizedSeries& series,
                                        std::size_t max_windows, std::size_t window = 30);

struct AblationRow {
  int steps_removed = 0;
  double rmse = 0.0;
};

/// Replaces the k oldest steps of every test window with zeros (the training
/// mean in normalized space) and reports RMSE against the true labels.
/// Throws ValueError for k >= window length.
std::vector<AblationRow> sequence_ablation(const models::LstmModel& model,
                                           const pipeline::WindowSet& test,
                                           const std::vector<int>& removals);

void export_predictions(const metrics::EvalReport& report, const std::string& path,
                        std::uint64_t config_hash);

void export_hidden_trace(const std::vector<double>& trace, std::size_t units,
                         const std::string& path, std::uint64_t config_hash);

void export_ablation(const std::vector<AblationRow>& rows, const std::string& path,
                     std::uint64_t config_hash);

}  // namespace rul::analysis
