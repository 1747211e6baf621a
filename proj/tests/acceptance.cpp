// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one PASS/FAIL line per criterion. Criteria that need the
// real FD001/FD003 files are skipped unless RUL_DATA_DIR points at them.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rul/analysis.hpp"
#include "rul/cmapss.hpp"
#include "rul/config.hpp"
#include "rul/experiment.hpp"
#include "rul/features.hpp"
#include "rul/gbdt.hpp"
#include "rul/gradcheck.hpp"
#include "rul/metrics.hpp"
#include "rul/models.hpp"
#include "rul/nn.hpp"
#include "rul/optim.hpp"
#include "rul/pipeline.hpp"
#include "rul/ridge.hpp"
#include "rul/rng.hpp"

using namespace rul;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

// fn returns "" on pass, "SKIP: ..." to skip, anything else on failure
void run(const std::string& name, const std::function<std::string()>& fn) {
  const auto t0 = Clock::now();
  std::string detail;
  try {
    detail = fn();
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (detail.empty()) {
    std::printf("[PASS] %-28s (%.1fs)\n", name.c_str(), secs);
  } else if (detail.rfind("SKIP:", 0) == 0) {
    std::printf("[SKIP] %-28s %s\n", name.c_str(), detail.c_str() + 5);
  } else {
    std::printf("[FAIL] %-28s %s (%.1fs)\n", name.c_str(), detail.c_str(), secs);
    ++g_failures;
  }
  std::fflush(stdout);
}

std::string fail_if(bool bad, const std::string& msg) { return bad ? msg : ""; }

// ---------------------------------------------------------------------------
// criterion 1: metric oracles
// ---------------------------------------------------------------------------

std::string metric_oracles() {
  const auto t0 = Clock::now();
  Rng rng(42, "acc.metrics");
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(80);
    std::vector<double> p(n), t(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = rng.uniform(0, 130);
      p[i] = t[i] + rng.uniform(-40, 40);
    }
    // brute force in long double, summed independently
    long double sse = 0, sae = 0, nasa = 0, mean = 0;
    for (double v : t) mean += v;
    mean /= static_cast<long double>(n);
    long double sst = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const long double h = static_cast<long double>(p[i]) - t[i];
      sse += h * h;
      sae += std::fabs(h);
      sst += (t[i] - mean) * (t[i] - mean);
      nasa += h < 0 ? std::exp(-h / 13.0L) - 1.0L : std::exp(h / 10.0L) - 1.0L;
    }
    const double n_d = static_cast<double>(n);
    if (std::abs(metrics::rmse(p, t) - std::sqrt(static_cast<double>(sse) / n_d)) > 1e-10)
      return "rmse deviates";
    if (std::abs(metrics::mae(p, t) - static_cast<double>(sae) / n_d) > 1e-10)
      return "mae deviates";
    if (std::abs(metrics::r2(p, t) - static_cast<double>(1.0L - sse / sst)) > 1e-10)
      return "r2 deviates";
    if (std::abs(metrics::nasa_score(p, t) - static_cast<double>(nasa)) > 1e-10)
      return "nasa deviates";
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  return fail_if(secs >= 1.0, "runtime " + std::to_string(secs) + "s >= 1s");
}

// ---------------------------------------------------------------------------
// criterion 2: Eq-style asymmetry of the scoring term
// ---------------------------------------------------------------------------

std::string asymmetry_property() {
  if (metrics::nasa_term(0.0) != 0.0) return "s(0) != 0";
  Rng rng(42, "acc.asym");
  for (int i = 0; i < 10000; ++i) {
    const double a = rng.uniform(1e-9, 200.0);
    if (!(metrics::nasa_term(a) > metrics::nasa_term(-a)))
      return "s(+a) <= s(-a) at a=" + std::to_string(a);
  }
  return "";
}

// ---------------------------------------------------------------------------
// criterion 3: ridge oracle equivalence
// ---------------------------------------------------------------------------

std::vector<double> ridge_augmented_oracle(const features::FeatureMatrix& f,
                                           const std::vector<double>& y, double alpha) {
  const std::size_t n = f.n, d = f.d, m = d + 1;
  std::vector<double> a(m * m, 0.0), rhs(m, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const double* row = f.row(r);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) a[i * m + j] += row[i] * row[j];
      a[i * m + d] += row[i];
      a[d * m + i] += row[i];
      rhs[i] += row[i] * y[r];
    }
    a[d * m + d] += 1.0;
    rhs[d] += y[r];
  }
  for (std::size_t i = 0; i < d; ++i) a[i * m + i] += alpha;

  std::vector<double> inv(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) inv[i * m + i] = 1.0;
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < m; ++r)
      if (std::abs(a[r * m + col]) > std::abs(a[pivot * m + col])) pivot = r;
    for (std::size_t j = 0; j < m; ++j) {
      std::swap(a[col * m + j], a[pivot * m + j]);
      std::swap(inv[col * m + j], inv[pivot * m + j]);
    }
    const double p = a[col * m + col];
    for (std::size_t j = 0; j < m; ++j) {
      a[col * m + j] /= p;
      inv[col * m + j] /= p;
    }
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col) continue;
      const double factor = a[r * m + col];
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < m; ++j) {
        a[r * m + j] -= factor * a[col * m + j];
        inv[r * m + j] -= factor * inv[col * m + j];
      }
    }
  }
  std::vector<double> out(m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) out[i] += inv[i * m + j] * rhs[j];
  return out;
}

std::string ridge_oracle() {
  const auto t0 = Clock::now();
  Rng rng(42, "acc.ridge");
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 1 + rng.below(50);
    const std::size_t n = d + 2 + rng.below(200 - d);
    features::FeatureMatrix f;
    f.n = n;
    f.d = d;
    f.values.resize(n * d);
    for (auto& v : f.values) v = rng.uniform(-3, 3);
    for (std::size_t j = 0; j < d; ++j) f.column_names.push_back("f" + std::to_string(j));
    std::vector<double> y(n);
    for (auto& v : y) v = rng.uniform(-50, 150);

    const auto model = ridge::fit(f, y, 1.0);
    const auto oracle = ridge_augmented_oracle(f, y, 1.0);
    double max_diff = std::abs(model.bias - oracle[d]);
    for (std::size_t j = 0; j < d; ++j)
      max_diff = std::max(max_diff, std::abs(model.weights[j] - oracle[j]));
    if (max_diff > 1e-8)
      return "weight difference " + std::to_string(max_diff) + " on trial " +
             std::to_string(trial);
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  return fail_if(secs >= 10.0, "runtime " + std::to_string(secs) + "s >= 10s");
}

// ---------------------------------------------------------------------------
// criterion 4: gradient checks
// ---------------------------------------------------------------------------

std::string gradient_checks() {
  const auto t0 = Clock::now();
  Rng rng(42, "acc.grad");
  auto fill = [&](nn::Tensor& t, double lo, double hi) {
    for (double& v : t.data) v = rng.uniform(lo, hi);
  };
  auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  };

  {  // dense
    const std::size_t B = 4, in = 6, out = 3;
    nn::Tensor x({B, in}), w({in, out}), b({out}), y({B, out}), proj({B, out});
    fill(x, -1, 1);
    fill(w, -1, 1);
    fill(b, -1, 1);
    fill(proj, -1, 1);
    for (nn::Tensor* t : {&x, &w, &b}) t->alloc_grad();
    nn::dense_forward(x.p(), w.p(), b.p(), y.p(), B, in, out);
    nn::dense_backward(x.p(), w.p(), proj.p(), x.g(), w.g(), b.g(), B, in, out);
    auto loss = [&]() {
      nn::dense_forward(x.p(), w.p(), b.p(), y.p(), B, in, out);
      return dot(y.data, proj.data);
    };
    std::vector<nn::Tensor*> params{&x, &w, &b};
    const double err = nn::grad_check(loss, params);
    if (err >= 1e-5) return "dense " + std::to_string(err);
  }
  {  // conv1d
    const std::size_t B = 2, cin = 3, cout = 4, T = 30;
    nn::Tensor x({B, cin, T}), k({cout, cin, 3}), b({cout}), y({B, cout, T}), proj({B, cout, T});
    fill(x, -1, 1);
    fill(k, -1, 1);
    fill(b, -1, 1);
    fill(proj, -1, 1);
    for (nn::Tensor* t : {&x, &k, &b}) t->alloc_grad();
    nn::conv1d_forward(x.p(), k.p(), b.p(), y.p(), B, cin, cout, T);
    nn::conv1d_backward(x.p(), k.p(), proj.p(), x.g(), k.g(), b.g(), B, cin, cout, T);
    auto loss = [&]() {
      nn::conv1d_forward(x.p(), k.p(), b.p(), y.p(), B, cin, cout, T);
      return dot(y.data, proj.data);
    };
    std::vector<nn::Tensor*> params{&x, &k, &b};
    const double err = nn::grad_check(loss, params);
    if (err >= 1e-5) return "conv1d " + std::to_string(err);
  }
  {  // LSTM through 5 steps
    const std::size_t B = 2, T = 5, in = 3, H = 4;
    nn::Tensor x({B, T, in}), wx({in, 4 * H}), wh({H, 4 * H}), b({4 * H}), h({B, T, H});
    nn::Tensor proj({B, T, H});
    fill(x, -1, 1);
    fill(wx, -0.5, 0.5);
    fill(wh, -0.5, 0.5);
    fill(b, -0.2, 0.2);
    fill(proj, -1, 1);
    for (nn::Tensor* t : {&x, &wx, &wh, &b}) t->alloc_grad();
    nn::LstmCache cache;
    nn::lstm_forward(x.p(), wx.p(), wh.p(), b.p(), B, T, in, H, cache, h.p());
    nn::lstm_backward(x.p(), wx.p(), wh.p(), cache, proj.p(), x.g(), wx.g(), wh.g(), b.g(), B, T,
                      in, H);
    auto loss = [&]() {
      nn::LstmCache c2;
      nn::lstm_forward(x.p(), wx.p(), wh.p(), b.p(), B, T, in, H, c2, h.p());
      return dot(h.data, proj.data);
    };
    std::vector<nn::Tensor*> params{&x, &wx, &wh, &b};
    const double err = nn::grad_check(loss, params);
    if (err >= 1e-5) return "lstm " + std::to_string(err);
  }
  {  // full CNN (dropout off), sampled subset per tensor
    models::CnnModel m = models::build_cnn(3, 42);
    pipeline::WindowSet ws;
    ws.n = 2;
    ws.window = 30;
    ws.channels = 3;
    ws.y.assign(2, 0.0);
    ws.x.resize(2 * 30 * 3);
    for (auto& v : ws.x) v = rng.uniform(-1, 1);
    // small residuals around the initial predictions keep every finite
    // difference inside its accurate range
    const auto pred = models::predict_rul(m, ws);
    ws.y = {pred[0] + 0.01, pred[1] - 0.016};
    models::cnn_loss_and_grad(m, ws.x.data(), ws.y.data(), 2);
    auto loss = [&]() { return models::cnn_loss(m, ws.x.data(), ws.y.data(), 2); };
    nn::GradCheckConfig cfg;
    cfg.max_per_tensor = 25;
    cfg.seed = 42;
    const double err = nn::grad_check(loss, m.params(), cfg);
    if (err >= 1e-5) return "full cnn " + std::to_string(err);
  }
  {  // full LSTM (dropout off)
    models::LstmModel m = models::build_lstm(3, 42);
    pipeline::WindowSet ws;
    ws.n = 2;
    ws.window = 30;
    ws.channels = 3;
    ws.y.assign(2, 0.0);
    ws.x.resize(2 * 30 * 3);
    for (auto& v : ws.x) v = rng.uniform(-1, 1);
    const auto pred = models::predict_rul(m, ws);
    ws.y = {pred[0] + 0.01, pred[1] - 0.016};
    models::lstm_loss_and_grad(m, ws.x.data(), ws.y.data(), 2);
    auto loss = [&]() { return models::lstm_loss(m, ws.x.data(), ws.y.data(), 2); };
    nn::GradCheckConfig cfg;
    cfg.max_per_tensor = 40;
    cfg.seed = 42;
    const double err = nn::grad_check(loss, m.params(), cfg);
    if (err >= 1e-5) return "full lstm " + std::to_string(err);
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  return fail_if(secs >= 60.0, "runtime " + std::to_string(secs) + "s >= 60s");
}

// ---------------------------------------------------------------------------
// criterion 5: gbdt split oracle
// ---------------------------------------------------------------------------

std::string gbdt_split_oracle() {
  Rng rng(42, "acc.split");
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(49);
    const std::size_t d = 1 + rng.below(3);
    features::FeatureMatrix f;
    f.n = n;
    f.d = d;
    f.values.resize(n * d);
    for (auto& v : f.values) v = 0.5 * static_cast<double>(rng.below(9));
    for (std::size_t j = 0; j < d; ++j) f.column_names.push_back("f" + std::to_string(j));
    std::vector<double> g(n), h(n, 1.0);
    for (auto& v : g) v = static_cast<double>(rng.below(9)) - 4.0;
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    std::vector<int> feats(d);
    std::iota(feats.begin(), feats.end(), 0);
    const double lambda = trial % 2 == 0 ? 0.0 : 1.0;
    const double mcw = trial % 3 == 0 ? 2.0 : 1.0;

    // exhaustive enumeration with the documented tie-break
    gbdt::SplitCandidate want{};
    bool want_found = false;
    for (int feat : feats) {
      std::set<double> values;
      for (std::size_t r : rows) values.insert(f.values[r * d + feat]);
      std::vector<double> sorted(values.begin(), values.end());
      for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
        const double thr = (sorted[k] + sorted[k + 1]) / 2.0;
        double gl = 0, hl = 0, gr = 0, hr = 0;
        for (std::size_t r : rows) {
          if (f.values[r * d + feat] < thr) {
            gl += g[r];
            hl += h[r];
          } else {
            gr += g[r];
            hr += h[r];
          }
        }
        if (hl < mcw || hr < mcw) continue;
        const double gain = 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) -
                                   (gl + gr) * (gl + gr) / (hl + hr + lambda));
        if (!want_found || gain > want.gain) {
          want = gbdt::SplitCandidate{feat, thr, gain};
          want_found = true;
        }
      }
    }
    if (want_found && want.gain <= 0.0) want_found = false;

    const auto got = gbdt::find_best_split(f, rows, g, h, feats, lambda, mcw);
    if (got.has_value() != want_found)
      return "presence mismatch on trial " + std::to_string(trial);
    if (got && (got->feature != want.feature || got->threshold != want.threshold ||
                std::abs(got->gain - want.gain) > 1e-12))
      return "split mismatch on trial " + std::to_string(trial);
  }
  return "";
}

// ---------------------------------------------------------------------------
// criterion 6: pipeline counts on FD001-shaped synthetic data
// ---------------------------------------------------------------------------

std::string pipeline_counts() {
  cmapss::SyntheticSpec spec;
  spec.n_engines = 100;
  spec.n_sensors = 21;
  spec.min_life = 128;
  spec.max_life = 362;
  spec.noise_std = 0.05;
  spec.seed = 42;
  const auto bundle = cmapss::generate_synthetic(spec);
  const auto sel = pipeline::select_sensors(bundle);
  const auto scaler = pipeline::fit_scaler(bundle.train, sel);

  std::vector<pipeline::NormalizedSeries> norm;
  std::vector<std::vector<double>> labels;
  std::size_t expected = 0;
  for (const auto& e : bundle.train) {
    norm.push_back(pipeline::apply_scaler(scaler, sel, e));
    labels.push_back(pipeline::compute_rul_labels(e, {}));
    expected += e.length() >= 30 ? e.length() - 29 : 0;
  }
  const auto train_w = pipeline::make_windows(norm, labels);
  if (train_w.n != expected)
    return "train windows " + std::to_string(train_w.n) + " != " + std::to_string(expected);

  const auto test_w = pipeline::make_test_windows(bundle.test, bundle.test_rul, sel, scaler, {});
  if (test_w.n != bundle.test.size()) return "test windows != engine count";

  // sub-30 test engines carry verified zero-padded prefixes
  std::size_t short_engines = 0;
  for (std::size_t i = 0; i < bundle.test.size(); ++i) {
    const std::size_t len = bundle.test[i].length();
    if (len >= 30) continue;
    ++short_engines;
    const std::size_t pad = 30 - len;
    for (std::size_t t = 0; t < pad; ++t)
      for (std::size_t c = 0; c < test_w.channels; ++c)
        if (test_w.x[(i * 30 + t) * test_w.channels + c] != 0.0)
          return "pad region is not zero for engine " + std::to_string(i + 1);
    const auto nseries = pipeline::apply_scaler(scaler, sel, bundle.test[i]);
    for (std::size_t t = 0; t < len; ++t)
      for (std::size_t c = 0; c < test_w.channels; ++c)
        if (test_w.x[(i * 30 + pad + t) * test_w.channels + c] != nseries.at(t, c))
          return "payload region mismatch for engine " + std::to_string(i + 1);
  }
  if (short_engines == 0) return "seeded fleet produced no sub-30 test engines";
  return "";
}

// ---------------------------------------------------------------------------
// criterion 7: determinism of full runs
// ---------------------------------------------------------------------------

config::ExperimentConfig synth_cfg(const std::string& out, const std::string& model,
                                   std::uint64_t seed) {
  config::KeyValues kv;
  kv.entries["experiment.subset"] = "SYNTH";
  kv.entries["experiment.model"] = model;
  kv.entries["experiment.out_dir"] = out;
  kv.entries["experiment.seed"] = std::to_string(seed);
  kv.entries["synth.n_engines"] = "10";
  kv.entries["synth.n_sensors"] = "6";
  kv.entries["synth.min_life"] = "40";
  kv.entries["synth.max_life"] = "70";
  kv.entries["synth.noise_std"] = "0.05";
  kv.entries["synth.seed"] = "42";
  kv.entries["train.max_epochs"] = "6";
  kv.entries["gbdt.n_estimators"] = "40";
  return config::experiment_from(kv);
}

std::string slurp_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string determinism() {
  const std::string out = "acceptance_out/determinism";
  for (const std::string model :
       {"raw_ridge", "ridge_fe", "poly_ridge", "gbdt", "cnn", "lstm"}) {
    fs::remove_all(out);
    auto cfg = synth_cfg(out, model, 42);
    const auto paths = experiment::output_paths(cfg);
    experiment::train_model(cfg);
    experiment::evaluate_model(cfg, paths.model_file);
    const std::string report1 = slurp_file(paths.report_json);

    fs::remove_all(out);
    experiment::train_model(cfg);
    experiment::evaluate_model(cfg, paths.model_file);
    if (slurp_file(paths.report_json) != report1)
      return model + " reports differ between identical runs";
  }
  // two seeds must land on different LSTM weights
  fs::remove_all(out);
  auto a = synth_cfg(out, "lstm", 42);
  experiment::train_model(a);
  const std::string ckpt_a = slurp_file(experiment::output_paths(a).model_file);
  fs::remove_all(out);
  auto b = synth_cfg(out, "lstm", 43);
  experiment::train_model(b);
  const std::string ckpt_b = slurp_file(experiment::output_paths(b).model_file);
  fs::remove_all(out);
  return fail_if(ckpt_a == ckpt_b, "seeds 42 and 43 produced identical LSTM checkpoints");
}

// ---------------------------------------------------------------------------
// criterion 8: scheduler / stopper traces
// ---------------------------------------------------------------------------

std::string scheduler_stopper_traces() {
  {  // case 1: strictly improving, lr untouched, stop only at max_epochs
    nn::PlateauScheduler sched;
    nn::EarlyStopper stopper;
    stopper.max_epochs = 30;
    nn::Tensor t({1});
    std::vector<nn::Tensor*> params{&t};
    double lr = 0.001;
    int stop_epoch = -1;
    for (int e = 1; e <= 30; ++e) {
      const double loss = 10.0 / e;
      const bool stop = stopper.step(loss, params, e);
      lr = sched.step(loss, lr);
      if (stop) {
        stop_epoch = e;
        break;
      }
    }
    if (lr != 0.001) return "case 1: lr changed";
    if (stop_epoch != 30) return "case 1: stopped at " + std::to_string(stop_epoch);
  }
  {  // case 2: 7 flat epochs halve once; best snapshot stays at epoch 1
    nn::PlateauScheduler sched;
    nn::EarlyStopper stopper;
    nn::Tensor t({1});
    std::vector<nn::Tensor*> params{&t};
    double lr = 0.001;
    for (int e = 1; e <= 7; ++e) {
      t.data[0] = e;
      stopper.step(1.0, params, e);
      lr = sched.step(1.0, lr);
    }
    if (lr != 0.0005) return "case 2: lr " + std::to_string(lr);
    if (stopper.best_epoch != 1) return "case 2: best epoch moved";
    stopper.restore(params);
    if (t.data[0] != 1.0) return "case 2: snapshot not restored";
  }
  {  // case 3: best at 3, then 20 flat -> stop at 23; two plateaus quarter lr
    nn::PlateauScheduler sched;
    nn::EarlyStopper stopper;
    nn::Tensor t({1});
    std::vector<nn::Tensor*> params{&t};
    double lr = 0.001;
    int stop_epoch = -1;
    for (int e = 1; e <= 200; ++e) {
      const double loss = e == 1 ? 5.0 : (e == 2 ? 4.0 : (e == 3 ? 1.0 : 2.0));
      const bool stop = stopper.step(loss, params, e);
      lr = sched.step(loss, lr);
      if (stop) {
        stop_epoch = e;
        break;
      }
    }
    if (stop_epoch != 23) return "case 3: stopped at " + std::to_string(stop_epoch);
    if (stopper.best_epoch != 3) return "case 3: best " + std::to_string(stopper.best_epoch);
    // epochs 4..9 and 10..15 are two six-epoch plateaus after the best
    if (lr != 0.001 * 0.5 * 0.5 * 0.5)
      return "case 3: lr " + std::to_string(lr);  // 3 halvings by epoch 23
  }
  return "";
}

// ---------------------------------------------------------------------------
// criterion 9: hidden-state bound (synthetic run)
// ---------------------------------------------------------------------------

std::string hidden_state_bound() {
  const std::string out = "acceptance_out/hidden";
  fs::remove_all(out);
  auto cfg = synth_cfg(out, "lstm", 42);
  cfg.hidden_windows = 20;
  const auto paths = experiment::output_paths(cfg);
  experiment::train_model(cfg);
  experiment::analyze_model(cfg, paths.model_file);

  std::ifstream f(paths.hidden_csv);
  std::string line;
  std::getline(f, line);  // config
  std::getline(f, line);  // header
  while (std::getline(f, line)) {
    std::stringstream ss(line);
    std::string tok;
    std::getline(ss, tok, ',');  // window index
    while (std::getline(ss, tok, ',')) {
      const double v = std::stod(tok);
      if (v < -1.0 || v > 1.0) return "activation " + tok + " outside [-1, 1]";
    }
  }
  fs::remove_all(out);
  return "";
}

// ---------------------------------------------------------------------------
// real-data criteria
// ---------------------------------------------------------------------------

const char* data_root() { return std::getenv("RUL_DATA_DIR"); }

bool have_subset(const std::string& tag) {
  const char* root = data_root();
  if (root == nullptr) return false;
  return fs::exists(std::string(root) + "/train_" + tag + ".txt") &&
         fs::exists(std::string(root) + "/test_" + tag + ".txt") &&
         fs::exists(std::string(root) + "/RUL_" + tag + ".txt");
}

config::ExperimentConfig real_cfg(const std::string& subset, const std::string& model) {
  config::KeyValues kv;
  kv.entries["experiment.subset"] = subset;
  kv.entries["experiment.model"] = model;
  kv.entries["experiment.out_dir"] = "acceptance_out/real";
  return config::experiment_from(kv);
}

// Trains only when no model file exists yet; train_seconds reports the fresh
// training wall time (0 when cached) so criteria can hold their runtime bounds.
metrics::EvalReport train_and_eval(const std::string& subset, const std::string& model,
                                   double* train_seconds = nullptr) {
  auto cfg = real_cfg(subset, model);
  const auto paths = experiment::output_paths(cfg);
  if (train_seconds) *train_seconds = 0.0;
  if (!fs::exists(paths.model_file)) {
    const auto t0 = Clock::now();
    experiment::train_model(cfg);
    if (train_seconds)
      *train_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  }
  return experiment::evaluate_model(cfg, paths.model_file);
}

std::string raw_ridge_fd001() {
  if (!have_subset("FD001")) return "SKIP: FD001 files not present";
  const auto t0 = Clock::now();
  const auto rep = train_and_eval("FD001", "raw_ridge");
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (std::abs(rep.rmse - 16.634) > 0.8)
    return "rmse " + std::to_string(rep.rmse) + " outside 16.634 +- 0.8";
  if (std::abs(rep.mae - 13.570) > 0.8)
    return "mae " + std::to_string(rep.mae) + " outside 13.570 +- 0.8";
  return fail_if(secs >= 120.0, "runtime " + std::to_string(secs) + "s >= 2 min");
}

std::string ridge_fe_fd003() {
  if (!have_subset("FD003")) return "SKIP: FD003 files not present";
  const auto rep = train_and_eval("FD003", "ridge_fe");
  return fail_if(std::abs(rep.rmse - 17.494) > 0.8,
                 "rmse " + std::to_string(rep.rmse) + " outside 17.494 +- 0.8");
}

std::string gbdt_fd003() {
  if (!have_subset("FD003")) return "SKIP: FD003 files not present";
  const auto rep = train_and_eval("FD003", "gbdt");
  if (rep.rmse > 15.5) return "rmse " + std::to_string(rep.rmse) + " > 15.5";
  if (rep.nasa_score > 600.0) return "nasa " + std::to_string(rep.nasa_score) + " > 600";
  return "";
}

std::string lstm_real() {
  if (!have_subset("FD001") || !have_subset("FD003"))
    return "SKIP: FD001/FD003 files not present";
  double secs = 0.0;
  const auto fd001 = train_and_eval("FD001", "lstm", &secs);
  if (secs >= 1800.0) return "FD001 training " + std::to_string(secs) + "s >= 30 min";
  if (fd001.rmse > 17.5) return "FD001 rmse " + std::to_string(fd001.rmse) + " > 17.5";
  if (fd001.r2 < 0.82) return "FD001 r2 " + std::to_string(fd001.r2) + " < 0.82";
  const auto fd003 = train_and_eval("FD003", "lstm", &secs);
  if (secs >= 1800.0) return "FD003 training " + std::to_string(secs) + "s >= 30 min";
  if (fd003.rmse > 17.0) return "FD003 rmse " + std::to_string(fd003.rmse) + " > 17.0";
  return "";
}

std::string cnn_fd001() {
  if (!have_subset("FD001")) return "SKIP: FD001 files not present";
  double secs = 0.0;
  const auto rep = train_and_eval("FD001", "cnn", &secs);
  if (secs >= 1800.0) return "training " + std::to_string(secs) + "s >= 30 min";
  return fail_if(rep.rmse > 19.5, "rmse " + std::to_string(rep.rmse) + " > 19.5");
}

std::string sequence_ablation_real() {
  if (!have_subset("FD001") || !have_subset("FD003"))
    return "SKIP: FD001/FD003 files not present";
  double rel_increase[2] = {0, 0};
  int idx = 0;
  for (const std::string subset : {"FD001", "FD003"}) {
    auto cfg = real_cfg(subset, "lstm");
    const auto paths = experiment::output_paths(cfg);
    if (!fs::exists(paths.model_file)) experiment::train_model(cfg);
    const auto model = models::load_lstm_checkpoint(paths.model_file);
    const auto data = experiment::prepare(cfg);
    const auto rows = analysis::sequence_ablation(model, data.test_w, {0, 5, 10, 15});
    for (std::size_t k = 0; k + 1 < rows.size(); ++k)
      if (!(rows[k + 1].rmse > rows[k].rmse))
        return subset + ": rmse not strictly increasing at k=" +
               std::to_string(rows[k + 1].steps_removed);
    rel_increase[idx++] = rows[1].rmse / rows[0].rmse - 1.0;
  }
  return fail_if(rel_increase[1] <= rel_increase[0],
                 "FD003 relative increase at k=5 does not exceed FD001's");
}

}  // namespace

int main() {
  std::printf("acceptance suite (set RUL_DATA_DIR to enable the real-data criteria)\n");
  fs::create_directories("acceptance_out");

  run("metric_oracles", metric_oracles);
  run("asymmetry_property", asymmetry_property);
  run("ridge_oracle", ridge_oracle);
  run("gradient_checks", gradient_checks);
  run("gbdt_split_oracle", gbdt_split_oracle);
  run("pipeline_counts", pipeline_counts);
  run("determinism", determinism);
  run("scheduler_stopper_traces", scheduler_stopper_traces);
  run("hidden_state_bound", hidden_state_bound);
  run("raw_ridge_fd001", raw_ridge_fd001);
  run("ridge_fe_fd003", ridge_fe_fd003);
  run("gbdt_fd003", gbdt_fd003);
  run("lstm_real_data", lstm_real);
  run("cnn_fd001", cnn_fd001);
  run("sequence_ablation", sequence_ablation_real);

  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all runnable criteria passed\n");
  return 0;
}
