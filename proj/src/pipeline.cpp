// SPDX-License-Identifier: Apache-2.0
#include "rul/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>

#include "rul/errors.hpp"
#include "rul/rng.hpp"

namespace rul::pipeline {

namespace {

constexpr double kStdFloor = 1e-8;
constexpr char kWindowMagic[8] = {'R', 'U', 'L', 'W', 'I', 'N', '0', '1'};

std::vector<int> drop_to_keep(const std::vector<int>& dropped) {
  std::vector<int> kept;
  for (int s = 1; s <= cmapss::kNumSensors; ++s)
    if (std::find(dropped.begin(), dropped.end(), s) == dropped.end()) kept.push_back(s);
  return kept;
}

}  // namespace

std::vector<std::string> SensorSelection::names() const {
  std::vector<std::string> out;
  out.reserve(kept.size());
  for (int s : kept) out.push_back("s" + std::to_string(s));
  return out;
}

std::vector<double> compute_rul_labels(const cmapss::EngineSeries& series, const RulConfig& cfg) {
  if (series.rows.empty()) throw ValueError("cannot label an empty series");
  const int final_cycle = static_cast<int>(series.length());
  std::vector<double> labels(series.length());
  for (std::size_t k = 0; k < series.length(); ++k) {
    const int t = static_cast<int>(k) + 1;
    labels[k] = static_cast<double>(std::min(final_cycle - t, cfg.max_rul));
  }
  return labels;
}

SensorSelection select_sensors(const cmapss::DatasetBundle& bundle) {
  switch (bundle.subset_id) {
    case cmapss::SubsetId::FD001:
      return SensorSelection{drop_to_keep({1, 5, 6, 10, 16, 18, 19})};
    case cmapss::SubsetId::FD003:
      return SensorSelection{drop_to_keep({1, 5, 10, 16, 18, 19})};
    case cmapss::SubsetId::SYNTH: {
      // Variance rule over all training rows.
      std::size_t n = 0;
      std::array<double, cmapss::kNumSensors> sum{};
      for (const auto& e : bundle.train)
        for (const auto& row : e.rows) {
          ++n;
          for (int s = 0; s < cmapss::kNumSensors; ++s) sum[s] += row.sensors[s];
        }
      if (n == 0) throw ValueError("cannot select sensors without training rows");
      std::array<double, cmapss::kNumSensors> ssq{};
      for (const auto& e : bundle.train)
        for (const auto& row : e.rows)
          for (int s = 0; s < cmapss::kNumSensors; ++s) {
            const double d = row.sensors[s] - sum[s] / static_cast<double>(n);
            ssq[s] += d * d;
          }
      SensorSelection sel;
      for (int s = 0; s < cmapss::kNumSensors; ++s)
        if (ssq[s] / static_cast<double>(n) >= 1e-12) sel.kept.push_back(s + 1);
      if (sel.kept.empty()) throw ValueError("all synthetic sensors are constant");
      return sel;
    }
  }
  throw ValueError("unknown subset id");
}

Scaler fit_scaler(std::span<const cmapss::EngineSeries> train, const SensorSelection& sel) {
  const std::size_t c = sel.count();
  std::size_t n = 0;
  std::vector<double> sum(c, 0.0);
  for (const auto& e : train)
    for (const auto& row : e.rows) {
      ++n;
      for (std::size_t j = 0; j < c; ++j) sum[j] += row.sensors[sel.kept[j] - 1];
    }
  if (n == 0) throw ValueError("cannot fit a scaler on zero rows");

  Scaler scaler;
  scaler.fitted_rows = n;
  scaler.mean.resize(c);
  scaler.std.assign(c, 0.0);
  for (std::size_t j = 0; j < c; ++j) scaler.mean[j] = sum[j] / static_cast<double>(n);
  for (const auto& e : train)
    for (const auto& row : e.rows)
      for (std::size_t j = 0; j < c; ++j) {
        const double d = row.sensors[sel.kept[j] - 1] - scaler.mean[j];
        scaler.std[j] += d * d;
      }
  for (std::size_t j = 0; j < c; ++j)
    scaler.std[j] = std::max(std::sqrt(scaler.std[j] / static_cast<double>(n)), kStdFloor);
  return scaler;
}

NormalizedSeries apply_scaler(const Scaler& scaler, const SensorSelection& sel,
                              const cmapss::EngineSeries& series) {
  const std::size_t c = sel.count();
  if (scaler.mean.size() != c || scaler.std.size() != c)
    throw StructuralError("scaler width " + std::to_string(scaler.mean.size()) +
                          " does not match selection width " + std::to_string(c));
  NormalizedSeries out;
  out.engine_id = series.engine_id;
  out.length = series.length();
  out.channels = c;
  out.values.resize(out.length * c);
  for (std::size_t t = 0; t < out.length; ++t)
    for (std::size_t j = 0; j < c; ++j)
      out.values[t * c + j] =
          (series.rows[t].sensors[sel.kept[j] - 1] - scaler.mean[j]) / scaler.std[j];
  return out;
}

EngineSplit split_engines(const std::vector<int>& ids, double ratio, std::uint64_t seed) {
  if (ids.size() < 2) throw ValueError("need at least 2 engines to split");
  if (!(ratio > 0.0 && ratio < 1.0)) throw ValueError("split ratio must be in (0,1)");
  std::vector<int> shuffled = ids;
  Rng rng(seed, "pipeline.split");
  rng.shuffle(shuffled);
  const std::size_t n_train =
      static_cast<std::size_t>(std::llround(ratio * static_cast<double>(ids.size())));
  EngineSplit split;
  split.seed = seed;
  split.train_ids.assign(shuffled.begin(), shuffled.begin() + n_train);
  split.val_ids.assign(shuffled.begin() + n_train, shuffled.end());
  return split;
}

WindowSet make_windows(std::span<const NormalizedSeries> series,
                       std::span<const std::vector<double>> labels, std::size_t window,
                       std::size_t stride) {
  if (series.size() != labels.size())
    throw StructuralError("series/label list lengths differ");
  if (window == 0 || stride == 0) throw ValueError("window and stride must be positive");

  WindowSet ws;
  ws.window = window;
  ws.channels = series.empty() ? 0 : series.front().channels;

  // Per-engine window counts, then prefix offsets so extraction can run in
  // parallel with a fixed output order.
  std::vector<std::size_t> counts(series.size(), 0);
  for (std::size_t e = 0; e < series.size(); ++e) {
    if (series[e].channels != ws.channels)
      throw StructuralError("inconsistent channel counts across series");
    if (labels[e].size() != series[e].length)
      throw StructuralError("label length does not match series length");
    if (series[e].length >= window) counts[e] = (series[e].length - window) / stride + 1;
  }
  std::vector<std::size_t> offsets(series.size() + 1, 0);
  for (std::size_t e = 0; e < series.size(); ++e) offsets[e + 1] = offsets[e] + counts[e];

  ws.n = offsets.back();
  ws.x.resize(ws.n * window * ws.channels);
  ws.y.resize(ws.n);
  ws.engine_of.resize(ws.n);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t e = 0; e < static_cast<std::ptrdiff_t>(series.size()); ++e) {
    const NormalizedSeries& s = series[e];
    for (std::size_t k = 0; k < counts[e]; ++k) {
      const std::size_t start = k * stride;
      const std::size_t idx = offsets[e] + k;
      std::memcpy(ws.x.data() + idx * window * ws.channels, s.values.data() + start * ws.channels,
                  window * ws.channels * sizeof(double));
      ws.y[idx] = labels[e][start + window - 1];
      ws.engine_of[idx] = s.engine_id;
    }
  }
  return ws;
}

WindowSet make_test_windows(std::span<const cmapss::EngineSeries> test,
                            std::span<const int> test_rul, const SensorSelection& sel,
                            const Scaler& scaler, const RulConfig& cfg, std::size_t window) {
  if (test.size() != test_rul.size())
    throw StructuralError("test series count does not match RUL label count");
  WindowSet ws;
  ws.n = test.size();
  ws.window = window;
  ws.channels = sel.count();
  ws.x.assign(ws.n * window * ws.channels, 0.0);
  ws.y.resize(ws.n);
  ws.engine_of.resize(ws.n);
  for (std::size_t i = 0; i < test.size(); ++i) {
    const NormalizedSeries norm = apply_scaler(scaler, sel, test[i]);
    const std::size_t take = std::min(norm.length, window);
    const std::size_t src_start = norm.length - take;   // last `take` cycles
    const std::size_t dst_start = window - take;        // zero-padded prefix
    std::memcpy(ws.x.data() + (i * window + dst_start) * ws.channels,
                norm.values.data() + src_start * ws.channels, take * ws.channels * sizeof(double));
    ws.y[i] = static_cast<double>(std::min(test_rul[i], cfg.max_rul));
    ws.engine_of[i] = test[i].engine_id;
  }
  return ws;
}

void save_windows(const WindowSet& ws, const std::string& path, std::uint64_t config_hash) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw StructuralError("cannot write " + path);
  auto put = [&](const void* p, std::size_t len) {
    f.write(static_cast<const char*>(p), static_cast<std::streamsize>(len));
  };
  put(kWindowMagic, sizeof kWindowMagic);
  const std::uint64_t header[4] = {config_hash, ws.n, ws.window, ws.channels};
  put(header, sizeof header);
  put(ws.x.data(), ws.x.size() * sizeof(double));
  put(ws.y.data(), ws.y.size() * sizeof(double));
  std::vector<std::int64_t> eng(ws.engine_of.begin(), ws.engine_of.end());
  put(eng.data(), eng.size() * sizeof(std::int64_t));
  if (!f) throw StructuralError("short write to " + path);
}

WindowSet load_windows(const std::string& path, std::uint64_t expected_hash) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw StructuralError("cannot open " + path);
  auto get = [&](void* p, std::size_t len) {
    f.read(static_cast<char*>(p), static_cast<std::streamsize>(len));
    if (!f) throw StructuralError("truncated window cache " + path);
  };
  char magic[8];
  get(magic, sizeof magic);
  if (std::memcmp(magic, kWindowMagic, sizeof magic) != 0)
    throw StructuralError(path + " is not a window cache");
  std::uint64_t header[4];
  get(header, sizeof header);
  if (header[0] != expected_hash)
    throw StructuralError("window cache " + path + " was built with a different config");
  WindowSet ws;
  ws.n = header[1];
  ws.window = header[2];
  ws.channels = header[3];
  ws.x.resize(ws.n * ws.window * ws.channels);
  ws.y.resize(ws.n);
  get(ws.x.data(), ws.x.size() * sizeof(double));
  get(ws.y.data(), ws.y.size() * sizeof(double));
  std::vector<std::int64_t> eng(ws.n);
  get(eng.data(), eng.size() * sizeof(std::int64_t));
  ws.engine_of.assign(eng.begin(), eng.end());
  return ws;
}

}  // namespace rul::pipeline
