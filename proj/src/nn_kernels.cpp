// SPDX-License-Identifier: Apache-2.0
#include "rul/nn.hpp"

#include <cmath>
#include <cstring>

#include "rul/errors.hpp"

namespace rul::nn {

namespace {

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Shared LSTM cell step; parallelized over the batch by the caller.
inline void lstm_cell(const double* x_t, const double* h_prev, const double* c_prev,
                      const double* wx, const double* wh, const double* bias, std::size_t in,
                      std::size_t H, double* gates, double* c_out, double* tanh_c_out,
                      double* h_out) {
  const std::size_t G = 4 * H;
  double* z = gates;  // reuse the cache slot as the pre-activation buffer
  std::memcpy(z, bias, G * sizeof(double));
  for (std::size_t k = 0; k < in; ++k) {
    const double xv = x_t[k];
    if (xv == 0.0) continue;
    const double* row = wx + k * G;
    for (std::size_t j = 0; j < G; ++j) z[j] += xv * row[j];
  }
  if (h_prev != nullptr) {
    for (std::size_t k = 0; k < H; ++k) {
      const double hv = h_prev[k];
      if (hv == 0.0) continue;
      const double* row = wh + k * G;
      for (std::size_t j = 0; j < G; ++j) z[j] += hv * row[j];
    }
  }
  for (std::size_t j = 0; j < H; ++j) {
    const double ig = sigmoid(z[j]);
    const double fg = sigmoid(z[H + j]);
    const double gg = std::tanh(z[2 * H + j]);
    const double og = sigmoid(z[3 * H + j]);
    z[j] = ig;
    z[H + j] = fg;
    z[2 * H + j] = gg;
    z[3 * H + j] = og;
    const double c = fg * (c_prev ? c_prev[j] : 0.0) + ig * gg;
    const double tc = std::tanh(c);
    c_out[j] = c;
    tanh_c_out[j] = tc;
    h_out[j] = og * tc;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// dense
// ---------------------------------------------------------------------------

void dense_forward(const double* x, const double* w, const double* b, double* y, std::size_t B,
                   std::size_t in, std::size_t out) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t bi = 0; bi < static_cast<std::ptrdiff_t>(B); ++bi) {
    double* yr = y + bi * out;
    std::memcpy(yr, b, out * sizeof(double));
    const double* xr = x + bi * in;
    for (std::size_t i = 0; i < in; ++i) {
      const double xv = xr[i];
      if (xv == 0.0) continue;
      const double* wr = w + i * out;
      for (std::size_t o = 0; o < out; ++o) yr[o] += xv * wr[o];
    }
  }
}

void dense_backward(const double* x, const double* w, const double* dy, double* dx, double* dw,
                    double* db, std::size_t B, std::size_t in, std::size_t out) {
  if (dx != nullptr) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t bi = 0; bi < static_cast<std::ptrdiff_t>(B); ++bi) {
      const double* dyr = dy + bi * out;
      double* dxr = dx + bi * in;
      for (std::size_t i = 0; i < in; ++i) {
        const double* wr = w + i * out;
        double acc = 0.0;
        for (std::size_t o = 0; o < out; ++o) acc += dyr[o] * wr[o];
        dxr[i] = acc;
      }
    }
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(in); ++i) {
    double* dwr = dw + i * out;
    for (std::size_t bi = 0; bi < B; ++bi) {
      const double xv = x[bi * in + i];
      if (xv == 0.0) continue;
      const double* dyr = dy + bi * out;
      for (std::size_t o = 0; o < out; ++o) dwr[o] += xv * dyr[o];
    }
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t o = 0; o < static_cast<std::ptrdiff_t>(out); ++o) {
    double acc = 0.0;
    for (std::size_t bi = 0; bi < B; ++bi) acc += dy[bi * out + o];
    db[o] += acc;
  }
}

// ---------------------------------------------------------------------------
// conv1d (kernel width 3, same padding)
// ---------------------------------------------------------------------------

void conv1d_forward(const double* x, const double* k, const double* b, double* y, std::size_t B,
                    std::size_t cin, std::size_t cout, std::size_t T) {
#pragma omp parallel for collapse(2) schedule(static)
  for (std::ptrdiff_t bi = 0; bi < static_cast<std::ptrdiff_t>(B); ++bi)
    for (std::ptrdiff_t co = 0; co < static_cast<std::ptrdiff_t>(cout); ++co) {
      double* yr = y + (bi * cout + co) * T;
      for (std::size_t t = 0; t < T; ++t) yr[t] = b[co];
      for (std::size_t ci = 0; ci < cin; ++ci) {
        const double* xr = x + (bi * cin + ci) * T;
        const double* kr = k + (co * cin + ci) * kKernelWidth;
        for (std::size_t t = 0; t < T; ++t) {
          double acc = 0.0;
          for (std::size_t u = 0; u < kKernelWidth; ++u) {
            const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(t + u) - 1;
            if (s >= 0 && s < static_cast<std::ptrdiff_t>(T)) acc += kr[u] * xr[s];
          }
          yr[t] += acc;
        }
      }
    }
}

void conv1d_backward(const double* x, const double* k, const double* dy, double* dx, double* dk,
                     double* db, std::size_t B, std::size_t cin, std::size_t cout,
                     std::size_t T) {
  if (dx != nullptr) {
#pragma omp parallel for collapse(2) schedule(static)
    for (std::ptrdiff_t bi = 0; bi < static_cast<std::ptrdiff_t>(B); ++bi)
      for (std::ptrdiff_t ci = 0; ci < static_cast<std::ptrdiff_t>(cin); ++ci) {
        double* dxr = dx + (bi * cin + ci) * T;
        for (std::size_t s = 0; s < T; ++s) {
          double acc = 0.0;
          for (std::size_t co = 0; co < cout; ++co) {
            const double* dyr = dy + (bi * cout + co) * T;
            const double* kr = k + (co * cin + ci) * kKernelWidth;
            for (std::size_t u = 0; u < kKernelWidth; ++u) {
              const std::ptrdiff_t t = static_cast<std::ptrdiff_t>(s) -
                                       static_cast<std::ptrdiff_t>(u) + 1;
              if (t >= 0 && t < static_cast<std::ptrdiff_t>(T)) acc += kr[u] * dyr[t];
            }
          }
          dxr[s] = acc;
        }
      }
  }
#pragma omp parallel for collapse(2) schedule(static)
  for (std::ptrdiff_t co = 0; co < static_cast<std::ptrdiff_t>(cout); ++co)
    for (std::ptrdiff_t ci = 0; ci < static_cast<std::ptrdiff_t>(cin); ++ci) {
      double* dkr = dk + (co * cin + ci) * kKernelWidth;
      for (std::size_t u = 0; u < kKernelWidth; ++u) {
        double acc = 0.0;
        for (std::size_t bi = 0; bi < B; ++bi) {
          const double* xr = x + (bi * cin + ci) * T;
          const double* dyr = dy + (bi * cout + co) * T;
          for (std::size_t t = 0; t < T; ++t) {
            const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(t + u) - 1;
            if (s >= 0 && s < static_cast<std::ptrdiff_t>(T)) acc += dyr[t] * xr[s];
          }
        }
        dkr[u] += acc;
      }
    }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t co = 0; co < static_cast<std::ptrdiff_t>(cout); ++co) {
    double acc = 0.0;
    for (std::size_t bi = 0; bi < B; ++bi) {
      const double* dyr = dy + (bi * cout + co) * T;
      for (std::size_t t = 0; t < T; ++t) acc += dyr[t];
    }
    db[co] += acc;
  }
}

// ---------------------------------------------------------------------------
// elementwise
// ---------------------------------------------------------------------------

void relu_forward(const double* x, double* y, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
    y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(const double* x, const double* dy, double* dx, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
    dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
}

void dropout_forward(const double* x, double* y, double* mask, std::size_t n, double p,
                     bool training, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw ValueError("dropout rate must be in [0,1)");
  if (!training || p == 0.0) {
    if (y != x) std::memcpy(y, x, n * sizeof(double));
    std::fill(mask, mask + n, 1.0);
    return;
  }
  const double scale = 1.0 / (1.0 - p);
  // Mask draws are sequential so the stream is independent of thread count.
  for (std::size_t i = 0; i < n; ++i) mask[i] = rng.uniform() < p ? 0.0 : scale;
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] * mask[i];
}

void dropout_backward(const double* mask, const double* dy, double* dx, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dx[i] = dy[i] * mask[i];
}

// ---------------------------------------------------------------------------
// LSTM
// ---------------------------------------------------------------------------

void lstm_forward(const double* x, const double* wx, const double* wh, const double* b,
                  std::size_t B, std::size_t T, std::size_t in, std::size_t H, LstmCache& cache,
                  double* h_all) {
  cache.B = B;
  cache.T = T;
  cache.in = in;
  cache.H = H;
  cache.gates.assign(T * B * 4 * H, 0.0);
  cache.c.assign(T * B * H, 0.0);
  cache.tanh_c.assign(T * B * H, 0.0);

  for (std::size_t t = 0; t < T; ++t) {
    bool overflow = false;
#pragma omp parallel for schedule(static) reduction(|| : overflow)
    for (std::ptrdiff_t bi = 0; bi < static_cast<std::ptrdiff_t>(B); ++bi) {
      const double* x_t = x + (bi * T + t) * in;
      const double* h_prev = t > 0 ? h_all + (bi * T + t - 1) * H : nullptr;
      const double* c_prev = t > 0 ? cache.c.data() + ((t - 1) * B + bi) * H : nullptr;
      double* gates = cache.gates.data() + (t * B + bi) * 4 * H;
      double* c_out = cache.c.data() + (t * B + bi) * H;
      double* tanh_c = cache.tanh_c.data() + (t * B + bi) * H;
      double* h_out = h_all + (bi * T + t) * H;
      lstm_cell(x_t, h_prev, c_prev, wx, wh, b, in, H, gates, c_out, tanh_c, h_out);
      for (std::size_t j = 0; j < H; ++j)
        if (!std::isfinite(h_out[j]) || !std::isfinite(c_out[j])) overflow = true;
    }
    if (overflow)
      throw NumericError("lstm: non-finite activation at time step " + std::to_string(t));
  }
}

void lstm_backward(const double* x, const double* wx, const double* wh, const LstmCache& cache,
                   const double* dh_all, double* dx, double* dwx, double* dwh, double* db,
                   std::size_t B, std::size_t T, std::size_t in, std::size_t H) {
  const std::size_t G = 4 * H;
  std::vector<double> dh_next(B * H, 0.0);
  std::vector<double> dc_next(B * H, 0.0);
  std::vector<double> dz(B * G);
  // Hidden states are needed for the recurrent weight gradient; rebuild h
  // from the cache (h = o * tanh(c)).
  auto h_at = [&](std::size_t t, std::size_t bi, std::size_t j) {
    return cache.gates[(t * B + bi) * G + 3 * H + j] * cache.tanh_c[(t * B + bi) * H + j];
  };

  // One enclosing region; the timestep loop runs in lockstep across threads
  // with a barrier between the per-sample phase and the parameter phase.
#pragma omp parallel
  for (std::size_t tt = T; tt-- > 0;) {
    // per-sample: gate deltas, then the flows into h_{t-1} and x_t
#pragma omp for schedule(static)
    for (std::ptrdiff_t bi = 0; bi < static_cast<std::ptrdiff_t>(B); ++bi) {
      const double* gates = cache.gates.data() + (tt * B + bi) * G;
      const double* tanh_c = cache.tanh_c.data() + (tt * B + bi) * H;
      const double* c_prev = tt > 0 ? cache.c.data() + ((tt - 1) * B + bi) * H : nullptr;
      double* dzr = dz.data() + bi * G;
      for (std::size_t j = 0; j < H; ++j) {
        const double ig = gates[j];
        const double fg = gates[H + j];
        const double gg = gates[2 * H + j];
        const double og = gates[3 * H + j];
        const double tc = tanh_c[j];
        const double dh = dh_all[(bi * T + tt) * H + j] + dh_next[bi * H + j];
        const double dc = dh * og * (1.0 - tc * tc) + dc_next[bi * H + j];
        const double d_i = dc * gg;
        const double d_f = dc * (c_prev ? c_prev[j] : 0.0);
        const double d_g = dc * ig;
        const double d_o = dh * tc;
        dzr[j] = d_i * ig * (1.0 - ig);
        dzr[H + j] = d_f * fg * (1.0 - fg);
        dzr[2 * H + j] = d_g * (1.0 - gg * gg);
        dzr[3 * H + j] = d_o * og * (1.0 - og);
        dc_next[bi * H + j] = dc * fg;
      }
      double* dhn = dh_next.data() + bi * H;
      for (std::size_t k = 0; k < H; ++k) {
        const double* row = wh + k * G;
        double acc = 0.0;
        for (std::size_t j = 0; j < G; ++j) acc += dzr[j] * row[j];
        dhn[k] = acc;
      }
      if (dx != nullptr) {
        double* dxr = dx + (bi * T + tt) * in;
        for (std::size_t k = 0; k < in; ++k) {
          const double* row = wx + k * G;
          double acc = 0.0;
          for (std::size_t j = 0; j < G; ++j) acc += dzr[j] * row[j];
          dxr[k] = acc;
        }
      }
    }

    // parameter gradients: each (row, column) pair is owned by one thread
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t kk = 0; kk < static_cast<std::ptrdiff_t>(in); ++kk) {
      double* row = dwx + kk * G;
      for (std::size_t bi = 0; bi < B; ++bi) {
        const double xv = x[(bi * T + tt) * in + kk];
        if (xv == 0.0) continue;
        const double* dzr = dz.data() + bi * G;
        for (std::size_t j = 0; j < G; ++j) row[j] += xv * dzr[j];
      }
    }
    if (tt > 0) {
#pragma omp for schedule(static) nowait
      for (std::ptrdiff_t kk = 0; kk < static_cast<std::ptrdiff_t>(H); ++kk) {
        double* row = dwh + kk * G;
        for (std::size_t bi = 0; bi < B; ++bi) {
          const double hv = h_at(tt - 1, bi, kk);
          if (hv == 0.0) continue;
          const double* dzr = dz.data() + bi * G;
          for (std::size_t j = 0; j < G; ++j) row[j] += hv * dzr[j];
        }
      }
    }
#pragma omp for schedule(static)
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(G); ++j) {
      double acc = 0.0;
      for (std::size_t bi = 0; bi < B; ++bi) acc += dz[bi * G + j];
      db[j] += acc;
    }
  }
}

// ---------------------------------------------------------------------------
// loss
// ---------------------------------------------------------------------------

double mse_loss(const double* pred, const double* target, std::size_t n, double* dpred) {
  if (n == 0) throw ValueError("mse_loss on empty vectors");
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = pred[i] - target[i];
    acc += d * d;
  }
  const double inv = 1.0 / static_cast<double>(n);
  if (dpred != nullptr)
    for (std::size_t i = 0; i < n; ++i) dpred[i] = 2.0 * (pred[i] - target[i]) * inv;
  return acc * inv;
}

// ---------------------------------------------------------------------------
// serial references
// ---------------------------------------------------------------------------

namespace ref {

void dense_forward(const double* x, const double* w, const double* b, double* y, std::size_t B,
                   std::size_t in, std::size_t out) {
  for (std::size_t bi = 0; bi < B; ++bi) {
    double* yr = y + bi * out;
    std::memcpy(yr, b, out * sizeof(double));
    const double* xr = x + bi * in;
    for (std::size_t i = 0; i < in; ++i) {
      const double xv = xr[i];
      if (xv == 0.0) continue;
      const double* wr = w + i * out;
      for (std::size_t o = 0; o < out; ++o) yr[o] += xv * wr[o];
    }
  }
}

void dense_backward(const double* x, const double* w, const double* dy, double* dx, double* dw,
                    double* db, std::size_t B, std::size_t in, std::size_t out) {
  if (dx != nullptr) {
    for (std::size_t bi = 0; bi < B; ++bi) {
      const double* dyr = dy + bi * out;
      double* dxr = dx + bi * in;
      for (std::size_t i = 0; i < in; ++i) {
        const double* wr = w + i * out;
        double acc = 0.0;
        for (std::size_t o = 0; o < out; ++o) acc += dyr[o] * wr[o];
        dxr[i] = acc;
      }
    }
  }
  for (std::size_t bi = 0; bi < B; ++bi) {
    const double* xr = x + bi * in;
    const double* dyr = dy + bi * out;
    for (std::size_t i = 0; i < in; ++i) {
      const double xv = xr[i];
      if (xv == 0.0) continue;
      double* dwr = dw + i * out;
      for (std::size_t o = 0; o < out; ++o) dwr[o] += xv * dyr[o];
    }
  }
  for (std::size_t o = 0; o < out; ++o) {
    double acc = 0.0;
    for (std::size_t bi = 0; bi < B; ++bi) acc += dy[bi * out + o];
    db[o] += acc;
  }
}

void conv1d_forward(const double* x, const double* k, const double* b, double* y, std::size_t B,
                    std::size_t cin, std::size_t cout, std::size_t T) {
  for (std::size_t bi = 0; bi < B; ++bi)
    for (std::size_t co = 0; co < cout; ++co) {
      double* yr = y + (bi * cout + co) * T;
      for (std::size_t t = 0; t < T; ++t) yr[t] = b[co];
      for (std::size_t ci = 0; ci < cin; ++ci) {
        const double* xr = x + (bi * cin + ci) * T;
        const double* kr = k + (co * cin + ci) * kKernelWidth;
        for (std::size_t t = 0; t < T; ++t) {
          double acc = 0.0;
          for (std::size_t u = 0; u < kKernelWidth; ++u) {
            const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(t + u) - 1;
            if (s >= 0 && s < static_cast<std::ptrdiff_t>(T)) acc += kr[u] * xr[s];
          }
          yr[t] += acc;
        }
      }
    }
}

void conv1d_backward(const double* x, const double* k, const double* dy, double* dx, double* dk,
                     double* db, std::size_t B, std::size_t cin, std::size_t cout,
                     std::size_t T) {
  if (dx != nullptr) {
    for (std::size_t bi = 0; bi < B; ++bi)
      for (std::size_t ci = 0; ci < cin; ++ci) {
        double* dxr = dx + (bi * cin + ci) * T;
        for (std::size_t s = 0; s < T; ++s) {
          double acc = 0.0;
          for (std::size_t co = 0; co < cout; ++co) {
            const double* dyr = dy + (bi * cout + co) * T;
            const double* kr = k + (co * cin + ci) * kKernelWidth;
            for (std::size_t u = 0; u < kKernelWidth; ++u) {
              const std::ptrdiff_t t = static_cast<std::ptrdiff_t>(s) -
                                       static_cast<std::ptrdiff_t>(u) + 1;
              if (t >= 0 && t < static_cast<std::ptrdiff_t>(T)) acc += kr[u] * dyr[t];
            }
          }
          dxr[s] = acc;
        }
      }
  }
  for (std::size_t co = 0; co < cout; ++co)
    for (std::size_t ci = 0; ci < cin; ++ci) {
      double* dkr = dk + (co * cin + ci) * kKernelWidth;
      for (std::size_t u = 0; u < kKernelWidth; ++u) {
        double acc = 0.0;
        for (std::size_t bi = 0; bi < B; ++bi) {
          const double* xr = x + (bi * cin + ci) * T;
          const double* dyr = dy + (bi * cout + co) * T;
          for (std::size_t t = 0; t < T; ++t) {
            const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(t + u) - 1;
            if (s >= 0 && s < static_cast<std::ptrdiff_t>(T)) acc += dyr[t] * xr[s];
          }
        }
        dkr[u] += acc;
      }
    }
  for (std::size_t co = 0; co < cout; ++co) {
    double acc = 0.0;
    for (std::size_t bi = 0; bi < B; ++bi) {
      const double* dyr = dy + (bi * cout + co) * T;
      for (std::size_t t = 0; t < T; ++t) acc += dyr[t];
    }
    db[co] += acc;
  }
}

void lstm_forward(const double* x, const double* wx, const double* wh, const double* b,
                  std::size_t B, std::size_t T, std::size_t in, std::size_t H, LstmCache& cache,
                  double* h_all) {
  cache.B = B;
  cache.T = T;
  cache.in = in;
  cache.H = H;
  cache.gates.assign(T * B * 4 * H, 0.0);
  cache.c.assign(T * B * H, 0.0);
  cache.tanh_c.assign(T * B * H, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t bi = 0; bi < B; ++bi) {
      const double* x_t = x + (bi * T + t) * in;
      const double* h_prev = t > 0 ? h_all + (bi * T + t - 1) * H : nullptr;
      const double* c_prev = t > 0 ? cache.c.data() + ((t - 1) * B + bi) * H : nullptr;
      double* gates = cache.gates.data() + (t * B + bi) * 4 * H;
      double* c_out = cache.c.data() + (t * B + bi) * H;
      double* tanh_c = cache.tanh_c.data() + (t * B + bi) * H;
      double* h_out = h_all + (bi * T + t) * H;
      lstm_cell(x_t, h_prev, c_prev, wx, wh, b, in, H, gates, c_out, tanh_c, h_out);
      for (std::size_t j = 0; j < H; ++j)
        if (!std::isfinite(h_out[j]) || !std::isfinite(c_out[j]))
          throw NumericError("lstm: non-finite activation at time step " + std::to_string(t));
    }
  }
}

void lstm_backward(const double* x, const double* wx, const double* wh, const LstmCache& cache,
                   const double* dh_all, double* dx, double* dwx, double* dwh, double* db,
                   std::size_t B, std::size_t T, std::size_t in, std::size_t H) {
  const std::size_t G = 4 * H;
  std::vector<double> dh_next(B * H, 0.0);
  std::vector<double> dc_next(B * H, 0.0);
  std::vector<double> dz(B * G);
  auto h_at = [&](std::size_t t, std::size_t bi, std::size_t j) {
    return cache.gates[(t * B + bi) * G + 3 * H + j] * cache.tanh_c[(t * B + bi) * H + j];
  };
  for (std::size_t tt = T; tt-- > 0;) {
    for (std::size_t bi = 0; bi < B; ++bi) {
      const double* gates = cache.gates.data() + (tt * B + bi) * G;
      const double* tanh_c = cache.tanh_c.data() + (tt * B + bi) * H;
      const double* c_prev = tt > 0 ? cache.c.data() + ((tt - 1) * B + bi) * H : nullptr;
      double* dzr = dz.data() + bi * G;
      for (std::size_t j = 0; j < H; ++j) {
        const double ig = gates[j];
        const double fg = gates[H + j];
        const double gg = gates[2 * H + j];
        const double og = gates[3 * H + j];
        const double tc = tanh_c[j];
        const double dh = dh_all[(bi * T + tt) * H + j] + dh_next[bi * H + j];
        const double dc = dh * og * (1.0 - tc * tc) + dc_next[bi * H + j];
        const double d_i = dc * gg;
        const double d_f = dc * (c_prev ? c_prev[j] : 0.0);
        const double d_g = dc * ig;
        const double d_o = dh * tc;
        dzr[j] = d_i * ig * (1.0 - ig);
        dzr[H + j] = d_f * fg * (1.0 - fg);
        dzr[2 * H + j] = d_g * (1.0 - gg * gg);
        dzr[3 * H + j] = d_o * og * (1.0 - og);
        dc_next[bi * H + j] = dc * fg;
      }
    }
    for (std::size_t bi = 0; bi < B; ++bi) {
      const double* dzr = dz.data() + bi * G;
      const double* x_t = x + (bi * T + tt) * in;
      for (std::size_t kk = 0; kk < in; ++kk) {
        const double xv = x_t[kk];
        if (xv == 0.0) continue;
        double* row = dwx + kk * G;
        for (std::size_t j = 0; j < G; ++j) row[j] += xv * dzr[j];
      }
      if (tt > 0) {
        for (std::size_t kk = 0; kk < H; ++kk) {
          const double hv = h_at(tt - 1, bi, kk);
          if (hv == 0.0) continue;
          double* row = dwh + kk * G;
          for (std::size_t j = 0; j < G; ++j) row[j] += hv * dzr[j];
        }
      }
    }
    for (std::size_t j = 0; j < G; ++j) {
      double acc = 0.0;
      for (std::size_t bi = 0; bi < B; ++bi) acc += dz[bi * G + j];
      db[j] += acc;
    }
    for (std::size_t bi = 0; bi < B; ++bi) {
      const double* dzr = dz.data() + bi * G;
      double* dhn = dh_next.data() + bi * H;
      for (std::size_t k = 0; k < H; ++k) {
        const double* row = wh + k * G;
        double acc = 0.0;
        for (std::size_t j = 0; j < G; ++j) acc += dzr[j] * row[j];
        dhn[k] = acc;
      }
      if (dx != nullptr) {
        double* dxr = dx + (bi * T + tt) * in;
        for (std::size_t k = 0; k < in; ++k) {
          const double* row = wx + k * G;
          double acc = 0.0;
          for (std::size_t j = 0; j < G; ++j) acc += dzr[j] * row[j];
          dxr[k] = acc;
        }
      }
    }
  }
}

}  // namespace ref

}  // namespace rul::nn
