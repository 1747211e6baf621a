// SPDX-License-Identifier: Apache-2.0
#include "rul/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rul/errors.hpp"
#include "rul/rng.hpp"

#include "json.hpp"

namespace rul::gbdt {

namespace {

struct FeatureBest {
  double gain = 0.0;
  double threshold = 0.0;
  bool found = false;
};

// Scan one feature over the node's rows; rows are ordered by (value, row id)
// so repeated runs see identical prefix sums.
FeatureBest scan_feature(const features::FeatureMatrix& f, std::span<const std::size_t> rows,
                         std::span<const double> g, std::span<const double> h, int feature,
                         double g_total, double h_total, double lambda,
                         double min_child_weight) {
  std::vector<std::pair<double, std::size_t>> vals;
  vals.reserve(rows.size());
  for (std::size_t r : rows) vals.emplace_back(f.values[r * f.d + feature], r);
  std::sort(vals.begin(), vals.end());

  FeatureBest best;
  double gl = 0.0;
  double hl = 0.0;
  for (std::size_t k = 0; k < vals.size(); ++k) {
    if (k > 0 && vals[k].first > vals[k - 1].first) {
      const double hr = h_total - hl;
      if (hl >= min_child_weight && hr >= min_child_weight) {
        const double gr = g_total - gl;
        const double gain = 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) -
                                   g_total * g_total / (h_total + lambda));
        // strictly-greater keeps the lowest threshold on a gain tie
        if (!best.found || gain > best.gain) {
          best.gain = gain;
          best.threshold = (vals[k - 1].first + vals[k].first) / 2.0;
          best.found = true;
        }
      }
    }
    gl += g[vals[k].second];
    hl += h[vals[k].second];
  }
  return best;
}

struct Builder {
  const features::FeatureMatrix& f;
  std::span<const double> g;
  std::span<const double> h;
  std::span<const int> candidates;
  const GbdtConfig& cfg;
  Tree tree;

  int build(std::span<std::size_t> rows, int depth) {
    double g_sum = 0.0;
    double h_sum = 0.0;
    for (std::size_t r : rows) {
      g_sum += g[r];
      h_sum += h[r];
    }
    const int idx = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{});
    if (depth < cfg.max_depth && rows.size() >= 2) {
      const auto split =
          find_best_split(f, rows, g, h, candidates, cfg.lambda_l2, cfg.min_child_weight);
      if (split) {
        const int feat = split->feature;
        const double thr = split->threshold;
        auto mid = std::partition(rows.begin(), rows.end(), [&](std::size_t r) {
          return f.values[r * f.d + feat] < thr;
        });
        const int left = build(rows.subspan(0, static_cast<std::size_t>(mid - rows.begin())),
                               depth + 1);
        const int right = build(rows.subspan(static_cast<std::size_t>(mid - rows.begin())),
                                depth + 1);
        tree.nodes[idx] = TreeNode{feat, thr, left, right, 0.0};
        return idx;
      }
    }
    tree.nodes[idx].weight = -g_sum / (h_sum + cfg.lambda_l2);
    return idx;
  }
};

}  // namespace

double Tree::eval(const double* row) const {
  int i = 0;
  while (!nodes[i].is_leaf()) i = row[nodes[i].feature] < nodes[i].threshold ? nodes[i].left
                                                                             : nodes[i].right;
  return nodes[i].weight;
}

std::optional<SplitCandidate> find_best_split(const features::FeatureMatrix& f,
                                              std::span<const std::size_t> rows,
                                              std::span<const double> gradients,
                                              std::span<const double> hessians,
                                              std::span<const int> candidate_features,
                                              double lambda, double min_child_weight) {
  if (rows.size() < 2 || candidate_features.empty()) return std::nullopt;
  double g_total = 0.0;
  double h_total = 0.0;
  for (std::size_t r : rows) {
    g_total += gradients[r];
    h_total += hessians[r];
  }

  std::vector<int> feats(candidate_features.begin(), candidate_features.end());
  std::sort(feats.begin(), feats.end());

  std::vector<FeatureBest> per_feature(feats.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(feats.size()); ++i)
    per_feature[i] = scan_feature(f, rows, gradients, hessians, feats[i], g_total, h_total,
                                  lambda, min_child_weight);

  // Sequential reduce in ascending feature order: the lowest index wins ties.
  std::optional<SplitCandidate> winner;
  for (std::size_t i = 0; i < feats.size(); ++i) {
    if (!per_feature[i].found) continue;
    if (!winner || per_feature[i].gain > winner->gain)
      winner = SplitCandidate{feats[i], per_feature[i].threshold, per_feature[i].gain};
  }
  if (winner && winner->gain <= 0.0) return std::nullopt;
  return winner;
}

GbdtModel fit(const features::FeatureMatrix& train_f, std::span<const double> train_y,
              const features::FeatureMatrix& val_f, std::span<const double> val_y,
              const GbdtConfig& cfg) {
  if (train_f.n == 0) throw Error("gbdt: empty training set");
  if (train_y.size() != train_f.n || val_y.size() != val_f.n)
    throw StructuralError("gbdt: feature/label row counts disagree");
  if (val_f.n == 0) throw Error("gbdt: early stopping requires a validation set");
  if (val_f.d != train_f.d) throw StructuralError("gbdt: train/val widths disagree");
  for (double v : train_y)
    if (!std::isfinite(v)) throw ValueError("gbdt: non-finite target");
  if (!(cfg.subsample > 0.0 && cfg.subsample <= 1.0) ||
      !(cfg.colsample_bytree > 0.0 && cfg.colsample_bytree <= 1.0))
    throw ValueError("gbdt: sampling rates must be in (0,1]");
  if (cfg.max_depth < 1) throw ValueError("gbdt: max_depth must be >= 1");

  const std::size_t n = train_f.n;
  const std::size_t d = train_f.d;

  GbdtModel model;
  model.learning_rate = cfg.learning_rate;
  model.n_features = d;
  model.column_names = train_f.column_names;
  model.base_score = std::accumulate(train_y.begin(), train_y.end(), 0.0) /
                     static_cast<double>(n);

  std::vector<double> preds(n, model.base_score);
  std::vector<double> val_preds(val_f.n, model.base_score);
  std::vector<double> g(n), h(n, 1.0);

  double best_rmse = std::numeric_limits<double>::infinity();
  int rounds_since_best = 0;

  for (int round = 0; round < cfg.n_estimators; ++round) {
    Rng rng(cfg.seed, "gbdt.round." + std::to_string(round));

    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    rng.shuffle(rows);
    const auto n_rows = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(cfg.subsample * static_cast<double>(n))), 1, n);
    rows.resize(n_rows);

    std::vector<int> feats(d);
    std::iota(feats.begin(), feats.end(), 0);
    rng.shuffle(feats);
    const auto n_feats = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(cfg.colsample_bytree * static_cast<double>(d))), 1,
        d);
    feats.resize(n_feats);
    std::sort(feats.begin(), feats.end());

    for (std::size_t i = 0; i < n; ++i) g[i] = preds[i] - train_y[i];

    Builder builder{train_f, g, h, feats, cfg, Tree{}};
    builder.build(rows, 0);
    model.trees.push_back(std::move(builder.tree));
    const Tree& tree = model.trees.back();

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
      preds[i] += cfg.learning_rate * tree.eval(train_f.row(i));
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(val_f.n); ++i)
      val_preds[i] += cfg.learning_rate * tree.eval(val_f.row(i));

    double sse = 0.0;
    for (std::size_t i = 0; i < val_f.n; ++i) {
      const double e = val_preds[i] - val_y[i];
      sse += e * e;
    }
    const double round_rmse = std::sqrt(sse / static_cast<double>(val_f.n));
    model.val_rmse.push_back(round_rmse);

    if (round_rmse < best_rmse) {
      best_rmse = round_rmse;
      model.best_round = round;
      rounds_since_best = 0;
    } else if (++rounds_since_best >= cfg.early_stopping_patience) {
      break;
    }
  }
  return model;
}

std::vector<double> predict(const GbdtModel& m, const features::FeatureMatrix& f) {
  if (f.d != m.n_features)
    throw StructuralError("gbdt: feature width " + std::to_string(f.d) +
                          " does not match model width " + std::to_string(m.n_features));
  std::vector<double> out(f.n, m.base_score);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(f.n); ++i) {
    const double* row = f.row(i);
    double acc = m.base_score;
    for (int t = 0; t <= m.best_round; ++t) acc += m.learning_rate * m.trees[t].eval(row);
    out[i] = acc;
  }
  return out;
}

std::string to_json(const GbdtModel& m) {
  nlohmann::ordered_json j;
  j["base_score"] = m.base_score;
  j["learning_rate"] = m.learning_rate;
  j["best_round"] = m.best_round;
  j["n_features"] = m.n_features;
  j["val_rmse"] = m.val_rmse;
  j["column_names"] = m.column_names;
  nlohmann::ordered_json trees = nlohmann::ordered_json::array();
  for (const Tree& t : m.trees) {
    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    for (const TreeNode& nd : t.nodes)
      nodes.push_back({{"f", nd.feature},
                       {"t", nd.threshold},
                       {"l", nd.left},
                       {"r", nd.right},
                       {"w", nd.weight}});
    trees.push_back(std::move(nodes));
  }
  j["trees"] = std::move(trees);
  return j.dump();
}

GbdtModel from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  GbdtModel m;
  m.base_score = j.at("base_score").get<double>();
  m.learning_rate = j.at("learning_rate").get<double>();
  m.best_round = j.at("best_round").get<int>();
  m.n_features = j.at("n_features").get<std::size_t>();
  m.val_rmse = j.at("val_rmse").get<std::vector<double>>();
  m.column_names = j.at("column_names").get<std::vector<std::string>>();
  for (const auto& nodes : j.at("trees")) {
    Tree t;
    for (const auto& nd : nodes)
      t.nodes.push_back(TreeNode{nd.at("f").get<int>(), nd.at("t").get<double>(),
                                 nd.at("l").get<int>(), nd.at("r").get<int>(),
                                 nd.at("w").get<double>()});
    m.trees.push_back(std::move(t));
  }
  return m;
}

}  // namespace rul::gbdt
