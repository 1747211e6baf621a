// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "rul/errors.hpp"
#include "rul/gbdt.hpp"
#include "rul/rng.hpp"

using namespace rul;
using features::FeatureMatrix;

namespace {

FeatureMatrix matrix(std::size_t n, std::size_t d, std::vector<double> values) {
  FeatureMatrix f;
  f.n = n;
  f.d = d;
  f.values = std::move(values);
  for (std::size_t j = 0; j < d; ++j) f.column_names.push_back("f" + std::to_string(j));
  return f;
}

// Exhaustive oracle: try every midpoint of every candidate feature, summing
// gradients by direct row filtering. Values and gradients come from small
// grids so sums (and therefore gains) are exact and ties are real.
std::optional<gbdt::SplitCandidate> enumerate_best(const FeatureMatrix& f,
                                                   const std::vector<std::size_t>& rows,
                                                   const std::vector<double>& g,
                                                   const std::vector<double>& h,
                                                   const std::vector<int>& feats, double lambda,
                                                   double mcw) {
  std::optional<gbdt::SplitCandidate> best;
  std::vector<int> ordered = feats;
  std::sort(ordered.begin(), ordered.end());
  for (int feat : ordered) {
    std::set<double> values;
    for (std::size_t r : rows) values.insert(f.values[r * f.d + feat]);
    std::vector<double> sorted(values.begin(), values.end());
    for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
      const double thr = (sorted[k] + sorted[k + 1]) / 2.0;
      double gl = 0, hl = 0, gr = 0, hr = 0;
      for (std::size_t r : rows) {
        if (f.values[r * f.d + feat] < thr) {
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
      if (!best || gain > best->gain) best = gbdt::SplitCandidate{feat, thr, gain};
    }
  }
  if (best && best->gain <= 0.0) return std::nullopt;
  return best;
}

}  // namespace

TEST_CASE("hand-evaluated split: gradients -1,-1,+1,+1 on 0,1,10,11") {
  const auto f = matrix(4, 1, {0, 1, 10, 11});
  const std::vector<std::size_t> rows{0, 1, 2, 3};
  const std::vector<double> g{-1, -1, 1, 1};
  const std::vector<double> h(4, 1.0);
  const std::vector<int> feats{0};
  const auto split = gbdt::find_best_split(f, rows, g, h, feats, 0.0, 0.0);
  REQUIRE(split.has_value());
  CHECK(split->feature == 0);
  CHECK(split->threshold == 5.5);
  // 0.5 * (4/2 + 4/2 - 0/4) = 2
  CHECK(split->gain == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("identical feature values admit no split") {
  const auto f = matrix(3, 1, {4, 4, 4});
  const std::vector<std::size_t> rows{0, 1, 2};
  const std::vector<double> g{-1, 0, 1}, h(3, 1.0);
  CHECK_FALSE(gbdt::find_best_split(f, rows, g, h, std::vector<int>{0}, 0.0, 0.0).has_value());
}

TEST_CASE("gain ties break to the lowest feature index") {
  // two identical columns: identical best gains on both
  const auto f = matrix(4, 2, {0, 0, 1, 1, 10, 10, 11, 11});
  const std::vector<std::size_t> rows{0, 1, 2, 3};
  const std::vector<double> g{-1, -1, 1, 1}, h(4, 1.0);
  const std::vector<int> feats{1, 0};  // deliberately unsorted
  const auto split = gbdt::find_best_split(f, rows, g, h, feats, 0.0, 0.0);
  REQUIRE(split.has_value());
  CHECK(split->feature == 0);
}

TEST_CASE("min_child_weight vetoes unbalanced splits") {
  const auto f = matrix(4, 1, {0, 10, 10, 10});
  const std::vector<std::size_t> rows{0, 1, 2, 3};
  const std::vector<double> g{-3, 1, 1, 1}, h(4, 1.0);
  CHECK(gbdt::find_best_split(f, rows, g, h, std::vector<int>{0}, 0.0, 0.0).has_value());
  CHECK_FALSE(gbdt::find_best_split(f, rows, g, h, std::vector<int>{0}, 0.0, 2.0).has_value());
}

TEST_CASE("matches the exhaustive enumeration oracle on grid instances") {
  Rng rng(42, "gbdt.oracle");
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + rng.below(49);
    const std::size_t d = 1 + rng.below(3);
    std::vector<double> vals(n * d), g(n), h(n, 1.0);
    for (auto& v : vals) v = 0.5 * static_cast<double>(rng.below(9));
    for (auto& v : g) v = static_cast<double>(rng.below(9)) - 4.0;
    const auto f = matrix(n, d, vals);
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    std::vector<int> feats(d);
    std::iota(feats.begin(), feats.end(), 0);
    const double lambda = trial % 2 == 0 ? 0.0 : 1.0;
    const double mcw = trial % 3 == 0 ? 2.0 : 0.0;

    const auto got = gbdt::find_best_split(f, rows, g, h, feats, lambda, mcw);
    const auto want = enumerate_best(f, rows, g, h, feats, lambda, mcw);
    REQUIRE(got.has_value() == want.has_value());
    if (got) {
      CHECK(got->feature == want->feature);
      CHECK(got->threshold == want->threshold);
      CHECK(got->gain == doctest::Approx(want->gain).epsilon(1e-12));
    }
  }
}

TEST_CASE("constant target collapses to the base score") {
  const std::size_t n = 20;
  std::vector<double> vals(n);
  for (std::size_t i = 0; i < n; ++i) vals[i] = static_cast<double>(i);
  const auto f = matrix(n, 1, vals);
  const std::vector<double> y(n, 42.0);
  gbdt::GbdtConfig cfg;
  cfg.n_estimators = 30;
  cfg.seed = 1;
  const auto model = gbdt::fit(f, y, f, y, cfg);
  CHECK(model.base_score == 42.0);
  for (double p : gbdt::predict(model, f)) CHECK(p == doctest::Approx(42.0).epsilon(1e-12));
}

TEST_CASE("depth-1 single tree recovers a step function") {
  const auto f = matrix(6, 1, {-3, -2, -1, 1, 2, 3});
  const std::vector<double> y{0, 0, 0, 10, 10, 10};
  gbdt::GbdtConfig cfg;
  cfg.n_estimators = 1;
  cfg.max_depth = 1;
  cfg.learning_rate = 1.0;
  cfg.subsample = 1.0;
  cfg.colsample_bytree = 1.0;
  cfg.lambda_l2 = 0.0;
  const auto model = gbdt::fit(f, y, f, y, cfg);
  REQUIRE(model.trees.size() == 1);
  const auto& root = model.trees[0].nodes[0];
  CHECK_FALSE(root.is_leaf());
  CHECK(root.threshold == 0.0);  // midpoint of the -1 .. 1 gap
  const auto pred = gbdt::predict(model, f);
  for (int i = 0; i < 3; ++i) CHECK(pred[i] == doctest::Approx(0.0).epsilon(1e-12));
  for (int i = 3; i < 6; ++i) CHECK(pred[i] == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("same seed, same data: identical validation trajectory") {
  Rng rng(7, "gbdt.det");
  const std::size_t n = 80, d = 5;
  std::vector<double> vals(n * d), y(n);
  for (auto& v : vals) v = rng.uniform(-1, 1);
  for (std::size_t i = 0; i < n; ++i) y[i] = vals[i * d] * 3.0 + rng.uniform(-0.1, 0.1);
  const auto f = matrix(n, d, vals);
  gbdt::GbdtConfig cfg;
  cfg.n_estimators = 40;
  cfg.seed = 9;
  const auto m1 = gbdt::fit(f, y, f, y, cfg);
  const auto m2 = gbdt::fit(f, y, f, y, cfg);
  CHECK(m1.val_rmse == m2.val_rmse);
  CHECK(m1.best_round == m2.best_round);
  CHECK(gbdt::predict(m1, f) == gbdt::predict(m2, f));
}

TEST_CASE("best round attains the minimum of the stored trajectory") {
  Rng rng(13, "gbdt.best");
  const std::size_t n = 60, d = 4;
  std::vector<double> vals(n * d), y(n);
  for (auto& v : vals) v = rng.uniform(-1, 1);
  for (std::size_t i = 0; i < n; ++i) y[i] = std::sin(vals[i * d]) + rng.uniform(-0.3, 0.3);
  const auto f = matrix(n, d, vals);
  gbdt::GbdtConfig cfg;
  cfg.n_estimators = 60;
  cfg.early_stopping_patience = 10;
  cfg.seed = 3;
  const auto model = gbdt::fit(f, y, f, y, cfg);
  REQUIRE(model.best_round >= 0);
  const double best = model.val_rmse[model.best_round];
  for (double v : model.val_rmse) CHECK(best <= v);
  // patience: no more than patience rounds after the best
  CHECK(static_cast<int>(model.val_rmse.size()) - 1 - model.best_round <=
        cfg.early_stopping_patience);
}

TEST_CASE("training rmse is non-increasing without subsampling") {
  Rng rng(23, "gbdt.mono");
  const std::size_t n = 50, d = 3;
  std::vector<double> vals(n * d), y(n);
  for (auto& v : vals) v = rng.uniform(-2, 2);
  for (std::size_t i = 0; i < n; ++i)
    y[i] = vals[i * d] - 2.0 * vals[i * d + 1] + rng.uniform(-0.2, 0.2);
  const auto f = matrix(n, d, vals);

  gbdt::GbdtConfig cfg;
  cfg.subsample = 1.0;
  cfg.colsample_bytree = 1.0;
  cfg.n_estimators = 25;
  cfg.early_stopping_patience = 1000;
  // validate on the training rows so val_rmse doubles as train rmse
  const auto model = gbdt::fit(f, y, f, y, cfg);
  for (std::size_t i = 0; i + 1 < model.val_rmse.size(); ++i)
    CHECK(model.val_rmse[i + 1] <= model.val_rmse[i] + 1e-12);
}

TEST_CASE("leaf weights stay bounded by the residual range") {
  Rng rng(31, "gbdt.leaf");
  const std::size_t n = 40;
  std::vector<double> vals(n), y(n);
  for (auto& v : vals) v = rng.uniform(-1, 1);
  for (std::size_t i = 0; i < n; ++i) y[i] = rng.uniform(0, 130);
  const auto f = matrix(n, 1, vals);
  gbdt::GbdtConfig cfg;
  cfg.n_estimators = 10;
  cfg.min_child_weight = 1.0;
  const auto model = gbdt::fit(f, y, f, y, cfg);
  double max_resid = 0.0;
  for (double v : y) max_resid = std::max(max_resid, std::abs(v - model.base_score));
  for (const auto& tree : model.trees)
    for (const auto& node : tree.nodes)
      if (node.is_leaf()) {
        CHECK(std::isfinite(node.weight));
        CHECK(std::abs(node.weight) <= max_resid / cfg.min_child_weight + 1e-9);
      }
}

TEST_CASE("prediction degenerate forms") {
  gbdt::GbdtModel m;
  m.base_score = 7.0;
  m.learning_rate = 0.05;
  m.n_features = 1;
  m.best_round = -1;
  const auto f = matrix(3, 1, {1, 2, 3});
  for (double p : gbdt::predict(m, f)) CHECK(p == 7.0);  // empty tree list

  gbdt::Tree leaf;
  leaf.nodes.push_back(gbdt::TreeNode{-1, 0, -1, -1, 2.0});
  m.trees.push_back(leaf);
  m.best_round = 0;
  for (double p : gbdt::predict(m, f)) CHECK(p == doctest::Approx(7.0 + 0.05 * 2.0));

  CHECK_THROWS_AS(gbdt::predict(m, matrix(1, 3, {0, 0, 0})), StructuralError);
}

TEST_CASE("json round-trip preserves predictions bit-exactly") {
  Rng rng(12, "gbdt.json");
  const std::size_t n = 50, d = 4;
  std::vector<double> vals(n * d), y(n);
  for (auto& v : vals) v = rng.uniform(-1, 1);
  for (std::size_t i = 0; i < n; ++i) y[i] = vals[i * d + 2] * 5 + rng.uniform(-1, 1);
  const auto f = matrix(n, d, vals);
  gbdt::GbdtConfig cfg;
  cfg.n_estimators = 15;
  const auto model = gbdt::fit(f, y, f, y, cfg);
  const auto back = gbdt::from_json(gbdt::to_json(model));
  CHECK(gbdt::predict(back, f) == gbdt::predict(model, f));
}

TEST_CASE("error paths") {
  const auto f = matrix(2, 1, {0, 1});
  std::vector<double> y{1, 2};
  gbdt::GbdtConfig cfg;
  CHECK_THROWS_AS(gbdt::fit(matrix(0, 1, {}), {}, f, y, cfg), Error);
  std::vector<double> bad{1, std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(gbdt::fit(f, bad, f, y, cfg), ValueError);
}
