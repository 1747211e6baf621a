// SPDX-License-Identifier: Apache-2.0
#include "rul/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "rul/errors.hpp"

#include "json.hpp"

namespace rul::metrics {

namespace {

void check_lengths(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size())
    throw StructuralError("metric inputs differ in length: " + std::to_string(pred.size()) +
                          " vs " + std::to_string(truth.size()));
  if (pred.empty()) throw ValueError("metric inputs are empty");
}

}  // namespace

double rmse(std::span<const double> pred, std::span<const double> truth) {
  check_lengths(pred, truth);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - truth[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(pred.size()));
}

double mae(std::span<const double> pred, std::span<const double> truth) {
  check_lengths(pred, truth);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) acc += std::abs(pred[i] - truth[i]);
  return acc / static_cast<double>(pred.size());
}

double r2(std::span<const double> pred, std::span<const double> truth) {
  check_lengths(pred, truth);
  double mean = 0.0;
  for (double t : truth) mean += t;
  mean /= static_cast<double>(truth.size());
  double sse = 0.0;
  double sst = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - truth[i];
    const double d = truth[i] - mean;
    sse += e * e;
    sst += d * d;
  }
  if (sst == 0.0) throw ValueError("r2 undefined: truth vector is constant");
  return 1.0 - sse / sst;
}

double nasa_term(double h) {
  return h < 0.0 ? std::exp(-h / 13.0) - 1.0 : std::exp(h / 10.0) - 1.0;
}

double nasa_score(std::span<const double> pred, std::span<const double> truth) {
  check_lengths(pred, truth);
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += nasa_term(pred[i] - truth[i]);
  return s;
}

EvalReport evaluate(std::span<const double> pred, std::span<const double> truth,
                    std::span<const int> engine_ids) {
  check_lengths(pred, truth);
  if (engine_ids.size() != pred.size())
    throw StructuralError("engine id count does not match prediction count");
  EvalReport r;
  r.rmse = rmse(pred, truth);
  r.mae = mae(pred, truth);
  r.r2 = r2(pred, truth);
  r.nasa_score = nasa_score(pred, truth);
  r.rows.resize(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i)
    r.rows[i] = EngineRow{engine_ids[i], truth[i], pred[i], pred[i] - truth[i]};
  std::sort(r.rows.begin(), r.rows.end(),
            [](const EngineRow& a, const EngineRow& b) { return a.engine_id < b.engine_id; });
  return r;
}

std::string report_to_json(const EvalReport& report, const std::string& subset,
                           const std::string& model, std::uint64_t config_hash) {
  nlohmann::ordered_json j;
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(config_hash));
  j["config_hash"] = hex;
  j["subset"] = subset;
  j["model"] = model;
  j["n_engines"] = report.rows.size();
  j["metrics"] = {{"rmse", report.rmse},
                  {"mae", report.mae},
                  {"r2", report.r2},
                  {"nasa_score", report.nasa_score}};
  return j.dump(2) + "\n";
}

}  // namespace rul::metrics
