// SPDX-License-Identifier: Apache-2.0
#include "rul/cmapss.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "rul/errors.hpp"
#include "rul/rng.hpp"

namespace rul::cmapss {

namespace {

constexpr int kFieldsPerRow = 2 + kNumSettings + kNumSensors;  // 26

// Splits on any run of spaces/tabs; carriage returns are treated as blanks.
std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double parse_double(std::string_view tok, std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ParseError("non-numeric field '" + std::string(tok) + "'", line_no);
  return v;
}

int parse_positive_int(std::string_view tok, const char* what, std::size_t line_no) {
  const double v = parse_double(tok, line_no);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v || i < 1)
    throw ParseError(std::string(what) + " must be a positive integer, got '" + std::string(tok) +
                         "'",
                     line_no);
  return i;
}

RawRow parse_row(std::string_view line, std::size_t line_no) {
  const auto fields = split_fields(line);
  if (fields.size() != static_cast<std::size_t>(kFieldsPerRow))
    throw ParseError("expected " + std::to_string(kFieldsPerRow) + " fields, got " +
                         std::to_string(fields.size()),
                     line_no);
  RawRow row;
  row.engine_id = parse_positive_int(fields[0], "engine id", line_no);
  row.cycle = parse_positive_int(fields[1], "cycle", line_no);
  for (int s = 0; s < kNumSettings; ++s) row.settings[s] = parse_double(fields[2 + s], line_no);
  for (int s = 0; s < kNumSensors; ++s)
    row.sensors[s] = parse_double(fields[2 + kNumSettings + s], line_no);
  return row;
}

std::vector<EngineSeries> parse_series(std::istream& text) {
  std::vector<EngineSeries> out;
  std::set<int> closed;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(text, line)) {
    ++line_no;
    if (split_fields(line).empty()) continue;  // blank line
    RawRow row = parse_row(line, line_no);
    if (out.empty() || out.back().engine_id != row.engine_id) {
      if (!out.empty()) closed.insert(out.back().engine_id);
      if (closed.count(row.engine_id))
        throw StructuralError("engine " + std::to_string(row.engine_id) +
                              " appears in more than one block");
      out.push_back(EngineSeries{row.engine_id, {}});
    }
    EngineSeries& series = out.back();
    const int expected = static_cast<int>(series.rows.size()) + 1;
    if (row.cycle != expected)
      throw StructuralError("engine " + std::to_string(row.engine_id) + ": expected cycle " +
                            std::to_string(expected) + ", got " + std::to_string(row.cycle));
    series.rows.push_back(row);
  }
  return out;
}

void append_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  out.append(buf, ptr);
}

}  // namespace

std::string to_string(SubsetId id) {
  switch (id) {
    case SubsetId::FD001: return "FD001";
    case SubsetId::FD003: return "FD003";
    case SubsetId::SYNTH: return "SYNTH";
  }
  return "?";
}

SubsetId subset_from_string(const std::string& name) {
  if (name == "FD001") return SubsetId::FD001;
  if (name == "FD003") return SubsetId::FD003;
  if (name == "SYNTH") return SubsetId::SYNTH;
  throw ConfigError("unknown subset '" + name + "' (expected FD001, FD003, or SYNTH)");
}

std::vector<EngineSeries> parse_train(std::istream& text) { return parse_series(text); }

std::pair<std::vector<EngineSeries>, std::vector<int>> parse_test(std::istream& data_text,
                                                                  std::istream& rul_text) {
  auto series = parse_series(data_text);
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(rul_text, line)) {
    ++line_no;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() != 1) throw ParseError("expected one RUL value per line", line_no);
    const double v = parse_double(fields[0], line_no);
    const int label = static_cast<int>(v);
    if (static_cast<double>(label) != v)
      throw ParseError("RUL label must be an integer", line_no);
    if (label < 0) throw ValueError("negative RUL label at line " + std::to_string(line_no));
    labels.push_back(label);
  }
  if (labels.size() != series.size())
    throw StructuralError("test series count " + std::to_string(series.size()) +
                          " does not match RUL label count " + std::to_string(labels.size()));
  return {std::move(series), std::move(labels)};
}

DatasetBundle generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n_engines < 1) throw ValueError("n_engines must be positive");
  if (spec.n_sensors < 1 || spec.n_sensors > kNumSensors)
    throw ValueError("n_sensors must be in [1, 21]");
  if (spec.min_life < 2 || spec.min_life > spec.max_life)
    throw ValueError("require 2 <= min_life <= max_life");
  if (spec.noise_std < 0.0) throw ValueError("noise_std must be nonnegative");
  for (int s : spec.constant_sensors)
    if (s < 1 || s > spec.n_sensors) throw ValueError("constant sensor index out of range");

  Rng life_rng(spec.seed, "synth.lives");
  Rng param_rng(spec.seed, "synth.params");
  Rng noise_rng(spec.seed, "synth.noise");
  Rng trunc_rng(spec.seed, "synth.trunc");

  // Per-sensor baselines and drift directions are shared across engines so a
  // sensor looks like one physical quantity throughout the fleet.
  std::array<double, kNumSensors> base{};
  std::array<double, kNumSensors> direction{};
  for (int s = 0; s < spec.n_sensors; ++s) {
    base[s] = param_rng.uniform(20.0, 650.0);
    direction[s] = param_rng.below(2) == 0 ? -1.0 : 1.0;
  }

  std::vector<bool> constant(kNumSensors, false);
  for (int s : spec.constant_sensors) constant[s - 1] = true;

  const double e3 = std::exp(3.0) - 1.0;

  auto make_engine = [&](int engine_id, int life) {
    EngineSeries series;
    series.engine_id = engine_id;
    series.rows.resize(life);
    std::array<double, kNumSettings> settings{};
    for (int k = 0; k < kNumSettings; ++k) settings[k] = param_rng.uniform(-0.01, 0.01);
    std::array<double, kNumSensors> magnitude{};
    std::array<bool, kNumSensors> exponential{};
    for (int s = 0; s < spec.n_sensors; ++s) {
      magnitude[s] = param_rng.uniform(5.0, 15.0);
      switch (spec.drift) {
        case DriftKind::linear: exponential[s] = false; break;
        case DriftKind::exponential: exponential[s] = true; break;
        case DriftKind::mixed: exponential[s] = param_rng.below(2) == 1; break;
      }
    }
    for (int t = 0; t < life; ++t) {
      RawRow& row = series.rows[t];
      row.engine_id = engine_id;
      row.cycle = t + 1;
      row.settings = settings;
      const double frac = life > 1 ? static_cast<double>(t) / (life - 1) : 0.0;
      for (int s = 0; s < spec.n_sensors; ++s) {
        if (constant[s]) {
          row.sensors[s] = base[s];
          continue;
        }
        const double ramp = exponential[s] ? (std::exp(3.0 * frac) - 1.0) / e3 : frac;
        double v = base[s] + direction[s] * magnitude[s] * ramp;
        if (spec.noise_std > 0.0) v += spec.noise_std * noise_rng.normal();
        row.sensors[s] = v;
      }
      // channels beyond n_sensors stay 0.0
    }
    return series;
  };

  DatasetBundle bundle;
  bundle.subset_id = SubsetId::SYNTH;
  const std::uint64_t span = static_cast<std::uint64_t>(spec.max_life - spec.min_life) + 1;
  for (int e = 0; e < spec.n_engines; ++e) {
    const int life = spec.min_life + static_cast<int>(life_rng.below(span));
    bundle.train.push_back(make_engine(e + 1, life));
  }
  for (int e = 0; e < spec.n_engines; ++e) {
    const int life = spec.min_life + static_cast<int>(life_rng.below(span));
    EngineSeries full = make_engine(e + 1, life);
    // Observed length in [5, life-1]; short truncations exercise zero-padding.
    const int observed = 5 + static_cast<int>(trunc_rng.below(static_cast<std::uint64_t>(life - 5)));
    full.rows.resize(observed);
    bundle.test.push_back(std::move(full));
    bundle.test_rul.push_back(life - observed);
  }
  return bundle;
}

void write_series(std::ostream& out, const std::vector<EngineSeries>& series) {
  std::string buf;
  for (const EngineSeries& e : series) {
    for (const RawRow& row : e.rows) {
      buf.clear();
      buf += std::to_string(row.engine_id);
      buf += ' ';
      buf += std::to_string(row.cycle);
      for (double v : row.settings) {
        buf += ' ';
        append_double(buf, v);
      }
      for (double v : row.sensors) {
        buf += ' ';
        append_double(buf, v);
      }
      buf += '\n';
      out << buf;
    }
  }
}

void write_rul(std::ostream& out, const std::vector<int>& labels) {
  for (int v : labels) out << v << '\n';
}

DatasetBundle load_bundle(SubsetId subset, const std::string& data_root) {
  if (subset == SubsetId::SYNTH)
    throw ConfigError("SYNTH bundles are generated, not loaded; use generate_synthetic");
  const std::string tag = to_string(subset);
  auto open = [&](const std::string& name) {
    std::ifstream f(data_root + "/" + name);
    if (!f) throw StructuralError("cannot open " + data_root + "/" + name);
    return f;
  };
  auto train_f = open("train_" + tag + ".txt");
  auto test_f = open("test_" + tag + ".txt");
  auto rul_f = open("RUL_" + tag + ".txt");

  DatasetBundle bundle;
  bundle.subset_id = subset;
  bundle.train = parse_train(train_f);
  auto [test, labels] = parse_test(test_f, rul_f);
  bundle.test = std::move(test);
  bundle.test_rul = std::move(labels);
  if (bundle.train.size() != 100 || bundle.test.size() != 100)
    throw StructuralError(tag + " must have 100 train and 100 test engines, got " +
                          std::to_string(bundle.train.size()) + "/" +
                          std::to_string(bundle.test.size()));
  return bundle;
}

}  // namespace rul::cmapss
