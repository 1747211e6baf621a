// SPDX-License-Identifier: Apache-2.0
#include "rul/features.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>

#include "rul/errors.hpp"

namespace rul::features {

namespace {

constexpr char kFeatMagic[8] = {'R', 'U', 'L', 'F', 'E', 'A', 'T', '1'};

void append_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  out.append(buf, ptr);
}

}  // namespace

void window_statistics(const double* window, std::size_t T, std::size_t channels, double* out) {
  const double n = static_cast<double>(T);
  const double t_mean = (n - 1.0) / 2.0;
  // Sum of (t - t_mean)^2 for t = 0..T-1; 2247.5 for T = 30.
  double t_ssq = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const double d = static_cast<double>(t) - t_mean;
    t_ssq += d * d;
  }
  for (std::size_t c = 0; c < channels; ++c) {
    double sum = 0.0;
    double cross = 0.0;  // sum of v_t * t
    for (std::size_t t = 0; t < T; ++t) {
      const double v = window[t * channels + c];
      sum += v;
      cross += v * static_cast<double>(t);
    }
    const double mean = sum / n;
    double ssq = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      const double d = window[t * channels + c] - mean;
      ssq += d * d;
    }
    const double first = window[c];
    const double last = window[(T - 1) * channels + c];
    out[5 * c + 0] = mean;
    out[5 * c + 1] = std::sqrt(ssq / n);
    out[5 * c + 2] = last;
    out[5 * c + 3] = last - first;
    out[5 * c + 4] = (cross - n * mean * t_mean) / t_ssq;
  }
}

FeatureMatrix engineer(const pipeline::WindowSet& ws,
                       const std::vector<std::string>& sensor_names) {
  if (sensor_names.size() != ws.channels)
    throw StructuralError("sensor name count does not match window channels");
  FeatureMatrix f;
  f.n = ws.n;
  f.d = 5 * ws.channels;
  f.values.resize(f.n * f.d);
  static const char* kStats[5] = {"mean", "std", "last", "delta", "slope"};
  for (const std::string& s : sensor_names)
    for (const char* stat : kStats) f.column_names.push_back(s + "_" + stat);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(ws.n); ++i)
    window_statistics(ws.window_at(i), ws.window, ws.channels, f.row(i));
  return f;
}

FeatureMatrix flatten_windows(const pipeline::WindowSet& ws,
                              const std::vector<std::string>& sensor_names) {
  if (sensor_names.size() != ws.channels)
    throw StructuralError("sensor name count does not match window channels");
  FeatureMatrix f;
  f.n = ws.n;
  f.d = ws.window * ws.channels;
  f.values = ws.x;  // already [n, window, channels] row-major == time-major flatten
  f.column_names.reserve(f.d);
  for (std::size_t t = 0; t < ws.window; ++t)
    for (const std::string& s : sensor_names)
      f.column_names.push_back("t" + std::to_string(t + 1) + "_" + s);
  return f;
}

FeatureMatrix polynomial_expand(const FeatureMatrix& f) {
  FeatureMatrix out;
  out.n = f.n;
  out.d = f.d + f.d * (f.d + 1) / 2;
  out.values.resize(out.n * out.d);
  out.column_names = f.column_names;
  for (std::size_t i = 0; i < f.d; ++i)
    for (std::size_t j = i; j < f.d; ++j)
      out.column_names.push_back(f.column_names[i] + "*" + f.column_names[j]);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(f.n); ++r) {
    const double* src = f.row(r);
    double* dst = out.row(r);
    std::memcpy(dst, src, f.d * sizeof(double));
    std::size_t k = f.d;
    for (std::size_t i = 0; i < f.d; ++i)
      for (std::size_t j = i; j < f.d; ++j) dst[k++] = src[i] * src[j];
  }
  return out;
}

pipeline::Scaler fit_feature_scaler(const FeatureMatrix& f) {
  if (f.n == 0) throw ValueError("cannot fit a scaler on zero rows");
  pipeline::Scaler scaler;
  scaler.fitted_rows = f.n;
  scaler.mean.assign(f.d, 0.0);
  scaler.std.assign(f.d, 0.0);
  for (std::size_t i = 0; i < f.n; ++i) {
    const double* row = f.row(i);
    for (std::size_t j = 0; j < f.d; ++j) scaler.mean[j] += row[j];
  }
  for (std::size_t j = 0; j < f.d; ++j) scaler.mean[j] /= static_cast<double>(f.n);
  for (std::size_t i = 0; i < f.n; ++i) {
    const double* row = f.row(i);
    for (std::size_t j = 0; j < f.d; ++j) {
      const double d = row[j] - scaler.mean[j];
      scaler.std[j] += d * d;
    }
  }
  for (std::size_t j = 0; j < f.d; ++j)
    scaler.std[j] = std::max(std::sqrt(scaler.std[j] / static_cast<double>(f.n)), 1e-8);
  return scaler;
}

FeatureMatrix apply_feature_scaler(const pipeline::Scaler& scaler, const FeatureMatrix& f) {
  if (scaler.mean.size() != f.d)
    throw StructuralError("feature scaler width does not match matrix width");
  FeatureMatrix out = f;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(f.n); ++i) {
    double* row = out.row(i);
    for (std::size_t j = 0; j < f.d; ++j) row[j] = (row[j] - scaler.mean[j]) / scaler.std[j];
  }
  return out;
}

void write_csv(const FeatureMatrix& f, const std::string& path, std::uint64_t config_hash) {
  std::ofstream out(path);
  if (!out) throw StructuralError("cannot write " + path);
  char hex[32];
  std::snprintf(hex, sizeof hex, "# config %016llx\n",
                static_cast<unsigned long long>(config_hash));
  out << hex;
  std::string line;
  for (std::size_t j = 0; j < f.d; ++j) {
    if (j) out << ',';
    out << f.column_names[j];
  }
  out << '\n';
  for (std::size_t i = 0; i < f.n; ++i) {
    line.clear();
    const double* row = f.row(i);
    for (std::size_t j = 0; j < f.d; ++j) {
      if (j) line += ',';
      append_double(line, row[j]);
    }
    line += '\n';
    out << line;
  }
}

void save_features(const FeatureMatrix& f, std::span<const double> y,
                   std::span<const int> engine_of, const std::string& path,
                   std::uint64_t config_hash) {
  if (y.size() != f.n || engine_of.size() != f.n)
    throw StructuralError("label/engine counts do not match feature rows");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StructuralError("cannot write " + path);
  auto put = [&](const void* p, std::size_t len) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(len));
  };
  put(kFeatMagic, sizeof kFeatMagic);
  const std::uint64_t header[3] = {config_hash, f.n, f.d};
  put(header, sizeof header);
  for (const std::string& name : f.column_names) {
    const std::uint32_t len = static_cast<std::uint32_t>(name.size());
    put(&len, sizeof len);
    put(name.data(), name.size());
  }
  put(f.values.data(), f.values.size() * sizeof(double));
  put(y.data(), y.size() * sizeof(double));
  std::vector<std::int64_t> eng(engine_of.begin(), engine_of.end());
  put(eng.data(), eng.size() * sizeof(std::int64_t));
  if (!out) throw StructuralError("short write to " + path);
}

LabeledFeatures load_features(const std::string& path, std::uint64_t expected_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StructuralError("cannot open " + path);
  auto get = [&](void* p, std::size_t len) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(len));
    if (!in) throw StructuralError("truncated feature cache " + path);
  };
  char magic[8];
  get(magic, sizeof magic);
  if (std::memcmp(magic, kFeatMagic, sizeof magic) != 0)
    throw StructuralError(path + " is not a feature cache");
  std::uint64_t header[3];
  get(header, sizeof header);
  if (header[0] != expected_hash)
    throw StructuralError("feature cache " + path + " was built with a different config");
  LabeledFeatures lf;
  lf.f.n = header[1];
  lf.f.d = header[2];
  lf.f.column_names.resize(lf.f.d);
  for (std::string& name : lf.f.column_names) {
    std::uint32_t len = 0;
    get(&len, sizeof len);
    name.resize(len);
    get(name.data(), len);
  }
  lf.f.values.resize(lf.f.n * lf.f.d);
  lf.y.resize(lf.f.n);
  get(lf.f.values.data(), lf.f.values.size() * sizeof(double));
  get(lf.y.data(), lf.y.size() * sizeof(double));
  std::vector<std::int64_t> eng(lf.f.n);
  get(eng.data(), eng.size() * sizeof(std::int64_t));
  lf.engine_of.assign(eng.begin(), eng.end());
  return lf;
}

}  // namespace rul::features
