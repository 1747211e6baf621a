// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "rul/cmapss.hpp"
#include "rul/errors.hpp"
#include "rul/pipeline.hpp"

using namespace rul;
using cmapss::EngineSeries;
using cmapss::RawRow;

namespace {

EngineSeries constant_series(int id, std::size_t len, double value) {
  EngineSeries e;
  e.engine_id = id;
  for (std::size_t t = 0; t < len; ++t) {
    RawRow row;
    row.engine_id = id;
    row.cycle = static_cast<int>(t) + 1;
    row.sensors.fill(value);
    e.rows.push_back(row);
  }
  return e;
}

EngineSeries ramp_series(int id, std::size_t len) {
  EngineSeries e = constant_series(id, len, 0.0);
  for (std::size_t t = 0; t < len; ++t)
    for (int s = 0; s < cmapss::kNumSensors; ++s)
      e.rows[t].sensors[s] = static_cast<double>(t) * (s + 1);
  return e;
}

pipeline::SensorSelection keep_first(int n) {
  pipeline::SensorSelection sel;
  for (int s = 1; s <= n; ++s) sel.kept.push_back(s);
  return sel;
}

pipeline::Scaler unit_scaler(std::size_t c) {
  pipeline::Scaler s;
  s.mean.assign(c, 0.0);
  s.std.assign(c, 1.0);
  return s;
}

}  // namespace

TEST_CASE("piecewise-linear labels: cap, terminal zero, linear region") {
  const auto e = constant_series(1, 192, 1.0);
  const auto labels = pipeline::compute_rul_labels(e, {});
  CHECK(labels[0] == 130.0);    // t=1, 191 capped
  CHECK(labels[191] == 0.0);    // t=192
  CHECK(labels[99] == 92.0);    // t=100
  CHECK_THROWS_AS(pipeline::compute_rul_labels(EngineSeries{}, {}), ValueError);
}

TEST_CASE("sensor selection per subset") {
  cmapss::DatasetBundle b;
  b.subset_id = cmapss::SubsetId::FD001;
  auto sel = pipeline::select_sensors(b);
  CHECK(sel.count() == 14);
  for (int dropped : {1, 5, 6, 10, 16, 18, 19})
    CHECK(std::find(sel.kept.begin(), sel.kept.end(), dropped) == sel.kept.end());

  b.subset_id = cmapss::SubsetId::FD003;
  sel = pipeline::select_sensors(b);
  CHECK(sel.count() == 15);
  CHECK(std::find(sel.kept.begin(), sel.kept.end(), 6) != sel.kept.end());  // s6 retained
  CHECK(std::is_sorted(sel.kept.begin(), sel.kept.end()));
}

TEST_CASE("SYNTH selection drops constant channels by variance") {
  cmapss::SyntheticSpec spec;
  spec.n_engines = 4;
  spec.n_sensors = 10;
  spec.min_life = 40;
  spec.max_life = 50;
  spec.constant_sensors = {2, 5, 9};
  spec.seed = 5;
  const auto bundle = cmapss::generate_synthetic(spec);
  const auto sel = pipeline::select_sensors(bundle);
  CHECK(sel.count() == 7);  // 10 active minus 3 constant; zero channels dropped too
  for (int s : spec.constant_sensors)
    CHECK(std::find(sel.kept.begin(), sel.kept.end(), s) == sel.kept.end());
}

TEST_CASE("scaler uses population std and fits train rows only") {
  EngineSeries e = constant_series(1, 3, 0.0);
  e.rows[0].sensors[0] = 1.0;
  e.rows[1].sensors[0] = 2.0;
  e.rows[2].sensors[0] = 3.0;
  std::vector<EngineSeries> train{e};
  const auto sel = keep_first(1);
  const auto scaler = pipeline::fit_scaler(train, sel);
  CHECK(scaler.mean[0] == doctest::Approx(2.0));
  CHECK(scaler.std[0] == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
  CHECK(scaler.fitted_rows == 3);
}

TEST_CASE("constant sensor floors the std and centers to zero") {
  std::vector<EngineSeries> train{constant_series(1, 10, 42.0)};
  const auto sel = keep_first(3);
  const auto scaler = pipeline::fit_scaler(train, sel);
  CHECK(scaler.std[0] == 1e-8);
  const auto norm = pipeline::apply_scaler(scaler, sel, train[0]);
  for (double v : norm.values) CHECK(v == 0.0);
}

TEST_CASE("applying a fitted scaler to its own data centers every sensor") {
  std::vector<EngineSeries> train{ramp_series(1, 40), ramp_series(2, 25)};
  const auto sel = keep_first(5);
  const auto scaler = pipeline::fit_scaler(train, sel);
  std::vector<double> sums(sel.count(), 0.0);
  std::size_t n = 0;
  for (const auto& e : train) {
    const auto norm = pipeline::apply_scaler(scaler, sel, e);
    for (std::size_t t = 0; t < norm.length; ++t)
      for (std::size_t c = 0; c < norm.channels; ++c) sums[c] += norm.at(t, c);
    n += e.length();
  }
  for (double s : sums) CHECK(std::abs(s / static_cast<double>(n)) < 1e-12);
}

TEST_CASE("scaler maps mean to 0 and mean+std to 1; reapplication is not a no-op") {
  pipeline::Scaler s;
  s.mean = {10.0};
  s.std = {4.0};
  const auto sel = keep_first(1);
  EngineSeries e = constant_series(1, 2, 0.0);
  e.rows[0].sensors[0] = 10.0;
  e.rows[1].sensors[0] = 14.0;
  const auto norm = pipeline::apply_scaler(s, sel, e);
  CHECK(norm.at(0, 0) == 0.0);
  CHECK(norm.at(1, 0) == 1.0);
  // the affine map is not idempotent; normalized data lives in its own type
  // so a second application cannot be expressed against NormalizedSeries
  const double twice = (norm.at(1, 0) - s.mean[0]) / s.std[0];
  CHECK(twice != norm.at(1, 0));
}

TEST_CASE("scaler width mismatch is structural") {
  const auto sel = keep_first(4);
  CHECK_THROWS_AS(pipeline::apply_scaler(unit_scaler(2), sel, constant_series(1, 5, 0.0)),
                  StructuralError);
}

TEST_CASE("80/20 split by engine id") {
  std::vector<int> ids(100);
  std::iota(ids.begin(), ids.end(), 1);
  const auto split = pipeline::split_engines(ids, 0.8, 42);
  CHECK(split.train_ids.size() == 80);
  CHECK(split.val_ids.size() == 20);
  const auto again = pipeline::split_engines(ids, 0.8, 42);
  CHECK(split.train_ids == again.train_ids);
  CHECK(split.val_ids == again.val_ids);

  std::vector<int> ten(10);
  std::iota(ten.begin(), ten.end(), 1);
  const auto small = pipeline::split_engines(ten, 0.8, 1);
  CHECK(small.train_ids.size() == 8);
  CHECK(small.val_ids.size() == 2);

  // union is the full set, disjoint
  std::vector<int> all = split.train_ids;
  all.insert(all.end(), split.val_ids.begin(), split.val_ids.end());
  std::sort(all.begin(), all.end());
  CHECK(all == ids);

  CHECK_THROWS_AS(pipeline::split_engines({1}, 0.8, 0), ValueError);
  CHECK_THROWS_AS(pipeline::split_engines(ids, 1.0, 0), ValueError);
}

TEST_CASE("window counts follow L - 29") {
  const auto sel = keep_first(2);
  const auto scaler = unit_scaler(2);
  auto windows_for = [&](std::size_t len) {
    const auto e = ramp_series(1, len);
    std::vector<pipeline::NormalizedSeries> norm{pipeline::apply_scaler(scaler, sel, e)};
    std::vector<std::vector<double>> labels{pipeline::compute_rul_labels(e, {})};
    return pipeline::make_windows(norm, labels);
  };
  CHECK(windows_for(30).n == 1);
  CHECK(windows_for(35).n == 6);
  CHECK(windows_for(29).n == 0);  // shorter than the window is skipped
}

TEST_CASE("L=192 label pattern over windows") {
  // oracle: window k (0-based) ends at cycle t = k+30, labeled min(192-t, 130);
  // the plateau holds while t <= 62, i.e. for the first 33 windows
  const auto sel = keep_first(1);
  const auto e = ramp_series(1, 192);
  std::vector<pipeline::NormalizedSeries> norm{pipeline::apply_scaler(unit_scaler(1), sel, e)};
  std::vector<std::vector<double>> labels{pipeline::compute_rul_labels(e, {})};
  const auto ws = pipeline::make_windows(norm, labels);
  REQUIRE(ws.n == 163);
  for (std::size_t k = 0; k < ws.n; ++k) {
    const double expected = std::min(192.0 - (static_cast<double>(k) + 30.0), 130.0);
    CHECK(ws.y[k] == expected);
  }
  for (std::size_t k = 0; k < 33; ++k) CHECK(ws.y[k] == 130.0);
  CHECK(ws.y[33] < 130.0);
  for (std::size_t k = 33; k + 1 < ws.n; ++k) CHECK(ws.y[k + 1] < ws.y[k]);
  CHECK(ws.y[ws.n - 1] == 0.0);
}

TEST_CASE("window labels are non-increasing within an engine") {
  const auto sel = keep_first(3);
  for (std::size_t len : {30u, 57u, 150u, 200u}) {
    const auto e = ramp_series(1, len);
    std::vector<pipeline::NormalizedSeries> norm{pipeline::apply_scaler(unit_scaler(3), sel, e)};
    std::vector<std::vector<double>> labels{pipeline::compute_rul_labels(e, {})};
    const auto ws = pipeline::make_windows(norm, labels);
    for (std::size_t k = 0; k + 1 < ws.n; ++k) CHECK(ws.y[k + 1] <= ws.y[k]);
  }
}

TEST_CASE("window count identity over a fleet") {
  const auto sel = keep_first(2);
  const auto scaler = unit_scaler(2);
  std::vector<pipeline::NormalizedSeries> norm;
  std::vector<std::vector<double>> labels;
  std::size_t expected = 0;
  for (std::size_t len : {30u, 45u, 12u, 100u, 29u, 31u}) {
    const auto e = ramp_series(static_cast<int>(len), len);
    norm.push_back(pipeline::apply_scaler(scaler, sel, e));
    labels.push_back(pipeline::compute_rul_labels(e, {}));
    expected += len >= 30 ? len - 29 : 0;
  }
  const auto ws = pipeline::make_windows(norm, labels);
  CHECK(ws.n == expected);
  // ordering is (series position, window start): engine ids appear in order
  std::size_t pos = 0;
  for (std::size_t i = 0; i < norm.size(); ++i) {
    const std::size_t cnt = norm[i].length >= 30 ? norm[i].length - 29 : 0;
    for (std::size_t k = 0; k < cnt; ++k) CHECK(ws.engine_of[pos++] == norm[i].engine_id);
  }
}

TEST_CASE("test windows take the last 30 cycles") {
  const auto sel = keep_first(2);
  const auto scaler = unit_scaler(2);
  const auto e = ramp_series(9, 45);
  const auto ws =
      pipeline::make_test_windows(std::vector{e}, std::vector{17}, sel, scaler, {});
  REQUIRE(ws.n == 1);
  const auto norm = pipeline::apply_scaler(scaler, sel, e);
  for (std::size_t t = 0; t < 30; ++t)
    for (std::size_t c = 0; c < 2; ++c)
      CHECK(ws.x[(t * 2) + c] == norm.at(15 + t, c));  // cycles 16..45
  CHECK(ws.y[0] == 17.0);
}

TEST_CASE("short test engines get a zero-padded prefix") {
  const auto sel = keep_first(2);
  const auto scaler = unit_scaler(2);
  auto e = ramp_series(4, 25);
  for (auto& row : e.rows)
    for (auto& v : row.sensors) v += 3.0;  // keep real rows nonzero
  const auto ws =
      pipeline::make_test_windows(std::vector{e}, std::vector{80}, sel, scaler, {});
  const auto norm = pipeline::apply_scaler(scaler, sel, e);
  for (std::size_t t = 0; t < 5; ++t)
    for (std::size_t c = 0; c < 2; ++c) CHECK(ws.x[t * 2 + c] == 0.0);
  for (std::size_t t = 5; t < 30; ++t)
    for (std::size_t c = 0; c < 2; ++c) CHECK(ws.x[t * 2 + c] == norm.at(t - 5, c));
  CHECK(ws.y[0] == 80.0);  // capped at 130 only when above
}

TEST_CASE("test labels are capped at max_rul") {
  const auto sel = keep_first(1);
  const auto e = ramp_series(1, 40);
  const auto ws =
      pipeline::make_test_windows(std::vector{e}, std::vector{145}, sel, unit_scaler(1), {});
  CHECK(ws.y[0] == 130.0);
}

TEST_CASE("one window per test engine") {
  cmapss::SyntheticSpec spec;
  spec.n_engines = 100;
  spec.n_sensors = 6;
  spec.min_life = 40;
  spec.max_life = 90;
  spec.seed = 10;
  const auto bundle = cmapss::generate_synthetic(spec);
  const auto sel = pipeline::select_sensors(bundle);
  const auto scaler = pipeline::fit_scaler(bundle.train, sel);
  const auto ws = pipeline::make_test_windows(bundle.test, bundle.test_rul, sel, scaler, {});
  CHECK(ws.n == 100);
}

TEST_CASE("no leakage: scaler fitted with validation rows would differ") {
  cmapss::SyntheticSpec spec;
  spec.n_engines = 10;
  spec.n_sensors = 5;
  spec.min_life = 40;
  spec.max_life = 80;
  spec.seed = 77;
  const auto bundle = cmapss::generate_synthetic(spec);
  const auto sel = pipeline::select_sensors(bundle);

  std::vector<int> ids;
  for (const auto& e : bundle.train) ids.push_back(e.engine_id);
  const auto split = pipeline::split_engines(ids, 0.8, 42);

  std::vector<cmapss::EngineSeries> train_only;
  std::size_t train_rows = 0;
  for (const auto& e : bundle.train) {
    if (std::find(split.train_ids.begin(), split.train_ids.end(), e.engine_id) !=
        split.train_ids.end()) {
      train_only.push_back(e);
      train_rows += e.length();
    }
  }
  const auto fitted = pipeline::fit_scaler(train_only, sel);
  const auto leaky = pipeline::fit_scaler(bundle.train, sel);
  CHECK(fitted.fitted_rows == train_rows);
  CHECK(leaky.fitted_rows > fitted.fitted_rows);
  bool any_mean_differs = false;
  for (std::size_t j = 0; j < sel.count(); ++j)
    if (std::abs(fitted.mean[j] - leaky.mean[j]) > 1e-9) any_mean_differs = true;
  CHECK(any_mean_differs);
}

TEST_CASE("window cache round-trips bit-exactly") {
  const auto sel = keep_first(3);
  const auto e = ramp_series(1, 60);
  std::vector<pipeline::NormalizedSeries> norm{pipeline::apply_scaler(unit_scaler(3), sel, e)};
  std::vector<std::vector<double>> labels{pipeline::compute_rul_labels(e, {})};
  const auto ws = pipeline::make_windows(norm, labels);

  const std::string path = "test_windows_cache.bin";
  pipeline::save_windows(ws, path, 0xabcdef);
  const auto back = pipeline::load_windows(path, 0xabcdef);
  CHECK(back.n == ws.n);
  CHECK(back.x == ws.x);
  CHECK(back.y == ws.y);
  CHECK(back.engine_of == ws.engine_of);
  CHECK_THROWS_AS(pipeline::load_windows(path, 0x1234), StructuralError);
  std::remove(path.c_str());
}
