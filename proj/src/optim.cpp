// SPDX-License-Identifier: Apache-2.0
#include "rul/optim.hpp"

#include <cmath>

#include "rul/errors.hpp"

namespace rul::nn {

void rmsprop_step(double* param, const double* grad, double* acc, std::size_t n,
                  const RmspropConfig& cfg, double lr, double weight_decay) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const double g = grad[i] + weight_decay * param[i];
    acc[i] = cfg.smoothing * acc[i] + (1.0 - cfg.smoothing) * g * g;
    param[i] -= lr * g / (std::sqrt(acc[i]) + cfg.epsilon);
  }
}

double PlateauScheduler::step(double val_loss, double current_lr) {
  if (val_loss < best_loss * (1.0 - min_improvement)) {
    best_loss = val_loss;
    epochs_since_improve = 0;
    return current_lr;
  }
  if (++epochs_since_improve > patience) {
    epochs_since_improve = 0;
    return current_lr * factor;
  }
  return current_lr;
}

bool EarlyStopper::step(double val_loss, std::span<Tensor* const> params, int epoch) {
  if (val_loss < best_loss) {
    best_loss = val_loss;
    best_epoch = epoch;
    epochs_since_improve = 0;
    best_snapshot.clear();
    best_snapshot.reserve(params.size());
    for (const Tensor* p : params) best_snapshot.push_back(p->data);
  } else {
    ++epochs_since_improve;
  }
  return epochs_since_improve >= patience || epoch >= max_epochs;
}

void EarlyStopper::restore(std::span<Tensor* const> params) const {
  if (best_snapshot.empty()) return;
  if (best_snapshot.size() != params.size())
    throw StructuralError("early stopper snapshot does not match parameter list");
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->data = best_snapshot[i];
}

}  // namespace rul::nn
