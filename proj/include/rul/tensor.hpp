// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

namespace rul::nn {

/// Dense row-major tensor of doubles with an optional gradient buffer of the
/// same shape.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until alloc_grad()

  Tensor() = default;
  explicit Tensor(std::initializer_list<std::size_t> dims) : shape(dims) {
    data.assign(numel(), 0.0);
  }

  std::size_t numel() const {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return shape.empty() ? 0 : n;
  }

  void alloc_grad() { grad.assign(data.size(), 0.0); }
  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

  double* p() { return data.data(); }
  const double* p() const { return data.data(); }
  double* g() { return grad.data(); }
  const double* g() const { return grad.data(); }
};

}  // namespace rul::nn
