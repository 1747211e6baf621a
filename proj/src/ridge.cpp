// SPDX-License-Identifier: Apache-2.0
#include "rul/ridge.hpp"

#include <cmath>

#include "rul/errors.hpp"

#include "json.hpp"

namespace rul::ridge {

namespace linalg {

void gram(const double* x, std::size_t n, std::size_t d, double* g) {
  // Each row of G is owned by one thread; the sum over samples stays serial,
  // so the result is bit-identical for any thread count.
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(d); ++i) {
    double* gi = g + i * d;
    for (std::size_t j = i; j < d; ++j) gi[j] = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double* row = x + r * d;
      const double xi = row[i];
      if (xi == 0.0) continue;
      for (std::size_t j = i; j < d; ++j) gi[j] += xi * row[j];
    }
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < i; ++j) g[i * d + j] = g[j * d + i];
}

void cholesky(double* a, std::size_t d) {
  for (std::size_t j = 0; j < d; ++j) {
    const double original = a[j * d + j];
    double diag = original;
    for (std::size_t k = 0; k < j; ++k) diag -= a[j * d + k] * a[j * d + k];
    // relative pivot floor: catches rank deficiency that rounding turns into
    // a tiny positive value
    if (!(diag > 1e-12 * std::max(original, 1e-300)) || !std::isfinite(diag))
      throw SolverError("Cholesky pivot " + std::to_string(j) +
                        " is not positive; the system is rank deficient (try alpha > 0)");
    const double ljj = std::sqrt(diag);
    a[j * d + j] = ljj;
    // threading only pays while the trailing block is substantial
#pragma omp parallel for schedule(static) if (d - j > 96)
    for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(j) + 1;
         i < static_cast<std::ptrdiff_t>(d); ++i) {
      double v = a[i * d + j];
      const double* li = a + i * d;
      const double* lj = a + j * d;
      for (std::size_t k = 0; k < j; ++k) v -= li[k] * lj[k];
      a[i * d + j] = v / ljj;
    }
  }
}

void cholesky_solve(const double* l, std::size_t d, const double* b, double* x) {
  // forward: L z = b
  for (std::size_t i = 0; i < d; ++i) {
    double v = b[i];
    for (std::size_t k = 0; k < i; ++k) v -= l[i * d + k] * x[k];
    x[i] = v / l[i * d + i];
  }
  // backward: L' w = z
  for (std::size_t ii = d; ii-- > 0;) {
    double v = x[ii];
    for (std::size_t k = ii + 1; k < d; ++k) v -= l[k * d + ii] * x[k];
    x[ii] = v / l[ii * d + ii];
  }
}

namespace ref {

void gram(const double* x, std::size_t n, std::size_t d, double* g) {
  for (std::size_t i = 0; i < d; ++i) {
    double* gi = g + i * d;
    for (std::size_t j = i; j < d; ++j) gi[j] = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double* row = x + r * d;
      const double xi = row[i];
      if (xi == 0.0) continue;
      for (std::size_t j = i; j < d; ++j) gi[j] += xi * row[j];
    }
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < i; ++j) g[i * d + j] = g[j * d + i];
}

void cholesky(double* a, std::size_t d) {
  for (std::size_t j = 0; j < d; ++j) {
    const double original = a[j * d + j];
    double diag = original;
    for (std::size_t k = 0; k < j; ++k) diag -= a[j * d + k] * a[j * d + k];
    if (!(diag > 1e-12 * std::max(original, 1e-300)) || !std::isfinite(diag))
      throw SolverError("Cholesky pivot " + std::to_string(j) +
                        " is not positive; the system is rank deficient (try alpha > 0)");
    const double ljj = std::sqrt(diag);
    a[j * d + j] = ljj;
    for (std::size_t i = j + 1; i < d; ++i) {
      double v = a[i * d + j];
      const double* li = a + i * d;
      const double* lj = a + j * d;
      for (std::size_t k = 0; k < j; ++k) v -= li[k] * lj[k];
      a[i * d + j] = v / ljj;
    }
  }
}

}  // namespace ref

}  // namespace linalg

RidgeModel fit(const features::FeatureMatrix& f, std::span<const double> y, double alpha) {
  if (f.n == 0 || y.size() != f.n) throw StructuralError("feature/label row counts disagree");
  if (alpha < 0.0) throw ValueError("alpha must be nonnegative");
  for (double v : f.values)
    if (!std::isfinite(v)) throw ValueError("non-finite feature value");
  for (double v : y)
    if (!std::isfinite(v)) throw ValueError("non-finite target value");

  const std::size_t n = f.n;
  const std::size_t d = f.d;

  std::vector<double> col_mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = f.row(i);
    for (std::size_t j = 0; j < d; ++j) col_mean[j] += row[j];
  }
  for (std::size_t j = 0; j < d; ++j) col_mean[j] /= static_cast<double>(n);
  double y_mean = 0.0;
  for (double v : y) y_mean += v;
  y_mean /= static_cast<double>(n);

  std::vector<double> centered(n * d);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const double* src = f.row(i);
    double* dst = centered.data() + i * d;
    for (std::size_t j = 0; j < d; ++j) dst[j] = src[j] - col_mean[j];
  }

  std::vector<double> g(d * d);
  linalg::gram(centered.data(), n, d, g.data());
  for (std::size_t j = 0; j < d; ++j) g[j * d + j] += alpha;

  std::vector<double> rhs(d, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(d); ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += centered[i * d + j] * (y[i] - y_mean);
    rhs[j] = acc;
  }

  linalg::cholesky(g.data(), d);
  RidgeModel m;
  m.alpha = alpha;
  m.column_names = f.column_names;
  m.weights.resize(d);
  linalg::cholesky_solve(g.data(), d, rhs.data(), m.weights.data());
  double dot = 0.0;
  for (std::size_t j = 0; j < d; ++j) dot += m.weights[j] * col_mean[j];
  m.bias = y_mean - dot;
  return m;
}

std::vector<double> predict(const RidgeModel& m, const features::FeatureMatrix& f) {
  if (f.d != m.weights.size())
    throw StructuralError("feature width " + std::to_string(f.d) +
                          " does not match model width " + std::to_string(m.weights.size()));
  std::vector<double> out(f.n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(f.n); ++i) {
    const double* row = f.row(i);
    double acc = m.bias;
    for (std::size_t j = 0; j < f.d; ++j) acc += row[j] * m.weights[j];
    out[i] = acc;
  }
  return out;
}

std::string to_json(const RidgeModel& m) {
  nlohmann::ordered_json j;
  j["alpha"] = m.alpha;
  j["bias"] = m.bias;
  j["weights"] = m.weights;
  j["column_names"] = m.column_names;
  return j.dump();
}

RidgeModel from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  RidgeModel m;
  m.alpha = j.at("alpha").get<double>();
  m.bias = j.at("bias").get<double>();
  m.weights = j.at("weights").get<std::vector<double>>();
  m.column_names = j.at("column_names").get<std::vector<std::string>>();
  return m;
}

}  // namespace rul::ridge
