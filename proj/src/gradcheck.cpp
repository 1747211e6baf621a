// SPDX-License-Identifier: Apache-2.0
#include "rul/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rul/errors.hpp"
#include "rul/rng.hpp"

namespace rul::nn {

double grad_check(const std::function<double()>& loss_fn, std::span<Tensor* const> params,
                  const GradCheckConfig& cfg) {
  Rng rng(cfg.seed, "gradcheck");
  double max_rel = 0.0;
  for (Tensor* t : params) {
    if (t->grad.size() != t->data.size())
      throw StructuralError("grad_check: tensor has no analytic gradient");
    std::vector<std::size_t> indices(t->data.size());
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    if (cfg.max_per_tensor > 0 && indices.size() > cfg.max_per_tensor) {
      rng.shuffle(indices);
      indices.resize(cfg.max_per_tensor);
    }
    for (std::size_t idx : indices) {
      const double orig = t->data[idx];
      t->data[idx] = orig + cfg.eps;
      const double lp = loss_fn();
      t->data[idx] = orig - cfg.eps;
      const double lm = loss_fn();
      t->data[idx] = orig;
      const double numeric = (lp - lm) / (2.0 * cfg.eps);
      const double analytic = t->grad[idx];
      const double rel = std::abs(analytic - numeric) /
                         std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

}  // namespace rul::nn
