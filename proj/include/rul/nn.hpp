// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "rul/rng.hpp"
#include "rul/tensor.hpp"

// Differentiable kernels. All buffers are dense row-major doubles. Every
// OpenMP loop assigns each output element to exactly one thread with a serial
// inner reduction, so results are bit-identical to the rul::nn::ref versions
// for any thread count.
namespace rul::nn {

inline constexpr std::size_t kKernelWidth = 3;  // conv kernels are fixed at 3 taps

// ---- dense ----------------------------------------------------------------
// x [B,in], w [in,out], b [out], y [B,out]
void dense_forward(const double* x, const double* w, const double* b, double* y, std::size_t B,
                   std::size_t in, std::size_t out);
// dx may be null when the input gradient is not needed. dw/db are accumulated.
void dense_backward(const double* x, const double* w, const double* dy, double* dx, double* dw,
                    double* db, std::size_t B, std::size_t in, std::size_t out);

// ---- conv1d, kernel 3, same padding ---------------------------------------
// x [B,cin,T], k [cout,cin,3], b [cout], y [B,cout,T]
void conv1d_forward(const double* x, const double* k, const double* b, double* y, std::size_t B,
                    std::size_t cin, std::size_t cout, std::size_t T);
void conv1d_backward(const double* x, const double* k, const double* dy, double* dx, double* dk,
                     double* db, std::size_t B, std::size_t cin, std::size_t cout, std::size_t T);

// ---- elementwise ----------------------------------------------------------
void relu_forward(const double* x, double* y, std::size_t n);
void relu_backward(const double* x, const double* dy, double* dx, std::size_t n);

// Inverted dropout: mask holds 0 or 1/(1-p); identity when !training or p==0.
void dropout_forward(const double* x, double* y, double* mask, std::size_t n, double p,
                     bool training, Rng& rng);
void dropout_backward(const double* mask, const double* dy, double* dx, std::size_t n);

// ---- LSTM ------------------------------------------------------------------
// Gate blocks are packed [i | f | g | o] along the last axis of wx [in,4H],
// wh [H,4H], b [4H]. h_0 = c_0 = 0.
struct LstmCache {
  std::size_t B = 0, T = 0, in = 0, H = 0;
  std::vector<double> gates;   // [T,B,4H] post-activation (i,f,g,o)
  std::vector<double> c;       // [T,B,H]
  std::vector<double> tanh_c;  // [T,B,H]
};

/// Writes all hidden states to h_all [B,T,H]. Throws NumericError naming the
/// time step when an activation overflows.
void lstm_forward(const double* x, const double* wx, const double* wh, const double* b,
                  std::size_t B, std::size_t T, std::size_t in, std::size_t H, LstmCache& cache,
                  double* h_all);

/// Backpropagation through time. dh_all [B,T,H] is the upstream gradient on
/// every hidden state (zero-fill the steps that do not feed the loss).
/// dx may be null; dwx/dwh/db are accumulated.
void lstm_backward(const double* x, const double* wx, const double* wh, const LstmCache& cache,
                   const double* dh_all, double* dx, double* dwx, double* dwh, double* db,
                   std::size_t B, std::size_t T, std::size_t in, std::size_t H);

// ---- loss ------------------------------------------------------------------
/// Mean squared error; writes d(loss)/d(pred) = 2(pred-target)/n into dpred
/// when non-null.
double mse_loss(const double* pred, const double* target, std::size_t n, double* dpred);

// ---- serial reference implementations (kept for testing / benchmarks) ------
namespace ref {
void dense_forward(const double* x, const double* w, const double* b, double* y, std::size_t B,
                   std::size_t in, std::size_t out);
void dense_backward(const double* x, const double* w, const double* dy, double* dx, double* dw,
                    double* db, std::size_t B, std::size_t in, std::size_t out);
void conv1d_forward(const double* x, const double* k, const double* b, double* y, std::size_t B,
                    std::size_t cin, std::size_t cout, std::size_t T);
void conv1d_backward(const double* x, const double* k, const double* dy, double* dx, double* dk,
                     double* db, std::size_t B, std::size_t cin, std::size_t cout, std::size_t T);
void lstm_forward(const double* x, const double* wx, const double* wh, const double* b,
                  std::size_t B, std::size_t T, std::size_t in, std::size_t H, LstmCache& cache,
                  double* h_all);
void lstm_backward(const double* x, const double* wx, const double* wh, const LstmCache& cache,
                   const double* dh_all, double* dx, double* dwx, double* dwh, double* db,
                   std::size_t B, std::size_t T, std::size_t in, std::size_t H);
}  // namespace ref

}  // namespace rul::nn
