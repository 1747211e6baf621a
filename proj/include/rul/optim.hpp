// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "rul/tensor.hpp"

namespace rul::nn {

struct RmspropConfig {
  double lr = 0.001;
  double smoothing = 0.99;
  double epsilon = 1e-8;
  double weight_decay = 1e-5;
};

/// One update: g' = g + weight_decay * param; acc = s*acc + (1-s)*g'^2;
/// param -= lr * g' / (sqrt(acc) + eps). Pass weight_decay = 0 for biases.
void rmsprop_step(double* param, const double* grad, double* acc, std::size_t n,
                  const RmspropConfig& cfg, double lr, double weight_decay);

/// Halves the learning rate after more than `patience` epochs without a
/// relative improvement of min_improvement over the best seen loss.
struct PlateauScheduler {
  double factor = 0.5;
  int patience = 5;
  double min_improvement = 1e-4;  // relative
  double best_loss = std::numeric_limits<double>::infinity();
  int epochs_since_improve = 0;

  double step(double val_loss, double current_lr);
};

/// Stops after `patience` epochs without strict improvement (or at
/// max_epochs) and keeps a snapshot of the best parameters.
struct EarlyStopper {
  int patience = 20;
  int max_epochs = 200;
  double best_loss = std::numeric_limits<double>::infinity();
  int best_epoch = -1;  // 1-based
  int epochs_since_improve = 0;
  std::vector<std::vector<double>> best_snapshot;

  /// epoch is 1-based. Returns true when training should stop.
  bool step(double val_loss, std::span<Tensor* const> params, int epoch);
  void restore(std::span<Tensor* const> params) const;
};

}  // namespace rul::nn
