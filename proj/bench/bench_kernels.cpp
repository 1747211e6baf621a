// SPDX-License-Identifier: Apache-2.0
//
// Serial-reference vs OpenMP kernel comparison. Every pair must agree
// bit-for-bit (max |diff| column); the speedup column tracks the win from
// threading. Usage: rul_bench [reps]
//
//   OMP_NUM_THREADS=4 ./rul_bench 20

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "rul/nn.hpp"
#include "rul/ridge.hpp"
#include "rul/rng.hpp"

using namespace rul;
using Clock = std::chrono::steady_clock;

namespace {

double time_ms(int reps, const std::function<void()>& fn) {
  fn();  // warm up
  const auto t0 = Clock::now();
  for (int r = 0; r < reps; ++r) fn();
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count() / reps;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void report(const char* name, double serial_ms, double parallel_ms, double diff) {
  std::printf("%-16s %10.3f ms %10.3f ms %8.2fx %12.3e\n", name, serial_ms, parallel_ms,
              serial_ms / parallel_ms, diff);
}

void fill(std::vector<double>& v, Rng& rng) {
  for (double& x : v) x = rng.uniform(-1, 1);
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::atoi(argv[1]) : 10;
  Rng rng(42, "bench");
  std::printf("%-16s %13s %13s %9s %12s\n", "kernel", "serial", "openmp", "speedup",
              "max|diff|");

  {  // dense: the CNN head shape
    const std::size_t B = 256, in = 1920, out = 128;
    std::vector<double> x(B * in), w(in * out), b(out), dy(B * out);
    fill(x, rng);
    fill(w, rng);
    fill(b, rng);
    fill(dy, rng);
    std::vector<double> y1(B * out), y2(B * out);
    const double s = time_ms(reps, [&] { nn::ref::dense_forward(x.data(), w.data(), b.data(), y1.data(), B, in, out); });
    const double p = time_ms(reps, [&] { nn::dense_forward(x.data(), w.data(), b.data(), y2.data(), B, in, out); });
    report("dense fwd", s, p, max_abs_diff(y1, y2));

    std::vector<double> dx1(B * in), dw1(in * out), db1(out);
    std::vector<double> dx2(B * in), dw2(in * out), db2(out);
    const double sb = time_ms(reps, [&] {
      std::fill(dw1.begin(), dw1.end(), 0.0);
      std::fill(db1.begin(), db1.end(), 0.0);
      nn::ref::dense_backward(x.data(), w.data(), dy.data(), dx1.data(), dw1.data(), db1.data(), B, in, out);
    });
    const double pb = time_ms(reps, [&] {
      std::fill(dw2.begin(), dw2.end(), 0.0);
      std::fill(db2.begin(), db2.end(), 0.0);
      nn::dense_backward(x.data(), w.data(), dy.data(), dx2.data(), dw2.data(), db2.data(), B, in, out);
    });
    report("dense bwd", sb, pb, std::max(max_abs_diff(dx1, dx2), max_abs_diff(dw1, dw2)));
  }

  {  // conv1d: the middle CNN layer shape
    const std::size_t B = 64, cin = 32, cout = 64, T = 30;
    std::vector<double> x(B * cin * T), k(cout * cin * 3), b(cout), dy(B * cout * T);
    fill(x, rng);
    fill(k, rng);
    fill(b, rng);
    fill(dy, rng);
    std::vector<double> y1(B * cout * T), y2(B * cout * T);
    const double s = time_ms(reps, [&] { nn::ref::conv1d_forward(x.data(), k.data(), b.data(), y1.data(), B, cin, cout, T); });
    const double p = time_ms(reps, [&] { nn::conv1d_forward(x.data(), k.data(), b.data(), y2.data(), B, cin, cout, T); });
    report("conv1d fwd", s, p, max_abs_diff(y1, y2));

    std::vector<double> dx1(B * cin * T), dk1(cout * cin * 3), db1(cout);
    std::vector<double> dx2(B * cin * T), dk2(cout * cin * 3), db2(cout);
    const double sb = time_ms(reps, [&] {
      std::fill(dk1.begin(), dk1.end(), 0.0);
      std::fill(db1.begin(), db1.end(), 0.0);
      nn::ref::conv1d_backward(x.data(), k.data(), dy.data(), dx1.data(), dk1.data(), db1.data(), B, cin, cout, T);
    });
    const double pb = time_ms(reps, [&] {
      std::fill(dk2.begin(), dk2.end(), 0.0);
      std::fill(db2.begin(), db2.end(), 0.0);
      nn::conv1d_backward(x.data(), k.data(), dy.data(), dx2.data(), dk2.data(), db2.data(), B, cin, cout, T);
    });
    report("conv1d bwd", sb, pb, std::max(max_abs_diff(dx1, dx2), max_abs_diff(dk1, dk2)));
  }

  {  // lstm: the production shape (n=15 sensors, hidden 32, window 30)
    const std::size_t B = 64, T = 30, in = 15, H = 32;
    std::vector<double> x(B * T * in), wx(in * 4 * H), wh(H * 4 * H), b(4 * H);
    std::vector<double> dh(B * T * H);
    fill(x, rng);
    fill(wx, rng);
    fill(wh, rng);
    fill(b, rng);
    fill(dh, rng);
    std::vector<double> h1(B * T * H), h2(B * T * H);
    nn::LstmCache c1, c2;
    const double s = time_ms(reps, [&] { nn::ref::lstm_forward(x.data(), wx.data(), wh.data(), b.data(), B, T, in, H, c1, h1.data()); });
    const double p = time_ms(reps, [&] { nn::lstm_forward(x.data(), wx.data(), wh.data(), b.data(), B, T, in, H, c2, h2.data()); });
    report("lstm fwd", s, p, max_abs_diff(h1, h2));

    std::vector<double> dx1(B * T * in), dwx1(in * 4 * H), dwh1(H * 4 * H), db1(4 * H);
    std::vector<double> dx2(B * T * in), dwx2(in * 4 * H), dwh2(H * 4 * H), db2(4 * H);
    const double sb = time_ms(reps, [&] {
      std::fill(dwx1.begin(), dwx1.end(), 0.0);
      std::fill(dwh1.begin(), dwh1.end(), 0.0);
      std::fill(db1.begin(), db1.end(), 0.0);
      nn::ref::lstm_backward(x.data(), wx.data(), wh.data(), c1, dh.data(), dx1.data(), dwx1.data(), dwh1.data(), db1.data(), B, T, in, H);
    });
    const double pb = time_ms(reps, [&] {
      std::fill(dwx2.begin(), dwx2.end(), 0.0);
      std::fill(dwh2.begin(), dwh2.end(), 0.0);
      std::fill(db2.begin(), db2.end(), 0.0);
      nn::lstm_backward(x.data(), wx.data(), wh.data(), c2, dh.data(), dx2.data(), dwx2.data(), dwh2.data(), db2.data(), B, T, in, H);
    });
    report("lstm bwd", sb, pb, std::max(max_abs_diff(dx1, dx2), max_abs_diff(dwx1, dwx2)));
  }

  {  // gram matrix: the polynomial-ridge normal equations
    const std::size_t n = 4000, d = 200;
    std::vector<double> x(n * d);
    fill(x, rng);
    std::vector<double> g1(d * d), g2(d * d);
    const double s = time_ms(reps, [&] { ridge::linalg::ref::gram(x.data(), n, d, g1.data()); });
    const double p = time_ms(reps, [&] { ridge::linalg::gram(x.data(), n, d, g2.data()); });
    report("gram", s, p, max_abs_diff(g1, g2));
  }

  {  // cholesky
    const std::size_t d = 600;
    std::vector<double> base(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) base[i * d + j] = (i == j) ? d + 1.0 : rng.uniform(0, 1);
    // symmetrize
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < i; ++j) base[i * d + j] = base[j * d + i];
    std::vector<double> a1, a2;
    const double s = time_ms(reps, [&] {
      a1 = base;
      ridge::linalg::ref::cholesky(a1.data(), d);
    });
    const double p = time_ms(reps, [&] {
      a2 = base;
      ridge::linalg::cholesky(a2.data(), d);
    });
    report("cholesky", s, p, max_abs_diff(a1, a2));
  }

  return 0;
}
