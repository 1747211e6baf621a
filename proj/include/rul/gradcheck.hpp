// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "rul/tensor.hpp"

namespace rul::nn {

struct GradCheckConfig {
  double eps = 1e-5;
  /// 0 checks every entry; otherwise a seeded random subset per tensor.
  std::size_t max_per_tensor = 0;
  std::uint64_t seed = 0;
};

/// Central-difference check. The caller must already have run
/// forward + backward so each tensor's grad holds the analytic gradient;
/// loss_fn re-evaluates the loss at the current parameter values.
/// Returns max over checked entries of |a - n| / max(|a|, |n|, 1e-8).
double grad_check(const std::function<double()>& loss_fn, std::span<Tensor* const> params,
                  const GradCheckConfig& cfg = {});

}  // namespace rul::nn
