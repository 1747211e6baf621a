// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rul/features.hpp"

namespace rul::gbdt {

struct GbdtConfig {
  int n_estimators = 500;
  int max_depth = 6;
  double learning_rate = 0.05;
  double subsample = 0.8;
  double colsample_bytree = 0.8;
  int early_stopping_patience = 20;
  double lambda_l2 = 1.0;
  double min_child_weight = 1.0;
  std::uint64_t seed = 42;
};

/// feature < 0 marks a leaf. Rows route left when value < threshold.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double weight = 0.0;

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double eval(const double* row) const;
};

struct SplitCandidate {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

/// Exact greedy search: thresholds are midpoints between adjacent distinct
/// values; gain is 0.5 * (GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l)). Returns
/// nothing when the best gain is <= 0 or a child would violate
/// min_child_weight. Ties break to the lowest feature index, then the lowest
/// threshold. gradients/hessians are indexed by row id (size f.n).
std::optional<SplitCandidate> find_best_split(const features::FeatureMatrix& f,
                                              std::span<const std::size_t> rows,
                                              std::span<const double> gradients,
                                              std::span<const double> hessians,
                                              std::span<const int> candidate_features,
                                              double lambda, double min_child_weight);

struct GbdtModel {
  double base_score = 0.0;
  double learning_rate = 0.05;
  int best_round = -1;  // prediction uses trees[0..best_round] only
  std::vector<Tree> trees;
  std::vector<double> val_rmse;  // per-round validation trajectory
  std::size_t n_features = 0;
  std::vector<std::string> column_names;
};

GbdtModel fit(const features::FeatureMatrix& train_f, std::span<const double> train_y,
              const features::FeatureMatrix& val_f, std::span<const double> val_y,
              const GbdtConfig& cfg);

std::vector<double> predict(const GbdtModel& m, const features::FeatureMatrix& f);

std::string to_json(const GbdtModel& m);
GbdtModel from_json(const std::string& text);

}  // namespace rul::gbdt
