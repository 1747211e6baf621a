// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include "rul/features.hpp"

namespace rul::ridge {

struct RidgeModel {
  std::vector<double> weights;
  double bias = 0.0;
  double alpha = 0.0;
  std::vector<std::string> column_names;
};

/// Minimize ||Fw + b - y||^2 + alpha * ||w||^2 with the bias unpenalized.
/// Solves (Fc' Fc + alpha I) w = Fc' yc on centered data via Cholesky,
/// then b = mean(y) - w . mean(F).
RidgeModel fit(const features::FeatureMatrix& f, std::span<const double> y, double alpha);

std::vector<double> predict(const RidgeModel& m, const features::FeatureMatrix& f);

std::string to_json(const RidgeModel& m);
RidgeModel from_json(const std::string& text);

namespace linalg {

/// G = X' X for row-major X [n x d]; writes the full symmetric matrix.
void gram(const double* x, std::size_t n, std::size_t d, double* g);

/// In-place lower Cholesky of a symmetric positive-definite d x d matrix.
/// Throws SolverError when a pivot is not strictly positive.
void cholesky(double* a, std::size_t d);

/// Solve L L' x = b given the Cholesky factor in the lower triangle.
void cholesky_solve(const double* l, std::size_t d, const double* b, double* x);

namespace ref {
void gram(const double* x, std::size_t n, std::size_t d, double* g);
void cholesky(double* a, std::size_t d);
}  // namespace ref

}  // namespace linalg

}  // namespace rul::ridge
