// SPDX-License-Identifier: Apache-2.0
#include "rul/analysis.hpp"

#include <charconv>
#include <cstring>
#include <fstream>

#include "rul/errors.hpp"

namespace rul::analysis {

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  out.append(buf, ptr);
}

void write_config_line(std::ofstream& f, std::uint64_t config_hash) {
  char hex[32];
  std::snprintf(hex, sizeof hex, "# config %016llx\n",
                static_cast<unsigned long long>(config_hash));
  f << hex;
}

}  // namespace

std::vector<double> hidden_state_trace(const models::LstmModel& model,
                                       const pipeline::WindowSet& ws) {
  return models::final_hidden(model, ws);
}

pipeline::WindowSet consecutive_windows(const pipeline::NormalizedSeries& series,
                                        std::size_t max_windows, std::size_t window) {
  if (series.length < window)
    throw ValueError("trajectory shorter than the window length");
  const std::size_t total = series.length - window + 1;
  const std::size_t count = max_windows == 0 ? total : std::min(max_windows, total);
  const std::size_t first = total - count;  // keep the windows nearest end of life
  pipeline::WindowSet ws;
  ws.n = count;
  ws.window = window;
  ws.channels = series.channels;
  ws.x.resize(count * window * series.channels);
  ws.y.assign(count, 0.0);
  ws.engine_of.assign(count, series.engine_id);
  for (std::size_t k = 0; k < count; ++k)
    std::memcpy(ws.x.data() + k * window * series.channels,
                series.values.data() + (first + k) * series.channels,
                window * series.channels * sizeof(double));
  return ws;
}

std::vector<AblationRow> sequence_ablation(const models::LstmModel& model,
                                           const pipeline::WindowSet& test,
                                           const std::vector<int>& removals) {
  std::vector<AblationRow> rows;
  for (int k : removals) {
    if (k < 0 || static_cast<std::size_t>(k) >= test.window)
      throw ValueError("steps removed must be in [0, " + std::to_string(test.window - 1) + "]");
    pipeline::WindowSet masked = test;
    for (std::size_t i = 0; i < masked.n; ++i) {
      double* w = masked.window_at(i);
      std::memset(w, 0, static_cast<std::size_t>(k) * masked.channels * sizeof(double));
    }
    const auto pred = models::predict_rul(model, masked);
    rows.push_back(AblationRow{k, metrics::rmse(pred, masked.y)});
  }
  return rows;
}

void export_predictions(const metrics::EvalReport& report, const std::string& path,
                        std::uint64_t config_hash) {
  std::ofstream f(path);
  if (!f) throw StructuralError("cannot write " + path);
  write_config_line(f, config_hash);
  f << "engine_id,y_true,y_pred,h\n";
  std::string line;
  for (const metrics::EngineRow& row : report.rows) {
    line.clear();
    line += std::to_string(row.engine_id);
    line += ',';
    append_double(line, row.y_true);
    line += ',';
    append_double(line, row.y_pred);
    line += ',';
    append_double(line, row.h);
    line += '\n';
    f << line;
  }
}

void export_hidden_trace(const std::vector<double>& trace, std::size_t units,
                         const std::string& path, std::uint64_t config_hash) {
  if (units == 0 || trace.size() % units != 0)
    throw StructuralError("hidden trace length is not a multiple of the unit count");
  std::ofstream f(path);
  if (!f) throw StructuralError("cannot write " + path);
  write_config_line(f, config_hash);
  f << "window";
  for (std::size_t u = 0; u < units; ++u) f << ",h" << u;
  f << '\n';
  std::string line;
  const std::size_t n = trace.size() / units;
  for (std::size_t i = 0; i < n; ++i) {
    line = std::to_string(i);
    for (std::size_t u = 0; u < units; ++u) {
      line += ',';
      append_double(line, trace[i * units + u]);
    }
    line += '\n';
    f << line;
  }
}

void export_ablation(const std::vector<AblationRow>& rows, const std::string& path,
                     std::uint64_t config_hash) {
  std::ofstream f(path);
  if (!f) throw StructuralError("cannot write " + path);
  write_config_line(f, config_hash);
  f << "steps_removed,rmse\n";
  std::string line;
  for (const AblationRow& r : rows) {
    line = std::to_string(r.steps_removed);
    line += ',';
    append_double(line, r.rmse);
    line += '\n';
    f << line;
  }
}

}  // namespace rul::analysis
