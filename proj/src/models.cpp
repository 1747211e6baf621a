// SPDX-License-Identifier: Apache-2.0
#include "rul/models.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>

#include "rul/errors.hpp"
#include "rul/gradcheck.hpp"
#include "rul/optim.hpp"

namespace rul::models {

namespace {

constexpr double kCnnDropout = 0.3;
constexpr double kLstmDropout = 0.5;
constexpr char kCkptMagic[8] = {'R', 'U', 'L', 'C', 'K', 'P', 'T', '1'};

void init_uniform(nn::Tensor& t, double limit, Rng& rng) {
  for (double& v : t.data) v = rng.uniform(-limit, limit);
}

double glorot_limit(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

// [B,T,C] -> [B,C,T]
void transpose_windows(const double* x, double* xt, std::size_t B, std::size_t T,
                       std::size_t C) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(B); ++b)
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t c = 0; c < C; ++c) xt[(b * C + c) * T + t] = x[(b * T + t) * C + c];
}

struct Buf {
  std::vector<double> v;
  double* ensure(std::size_t n) {
    if (v.size() < n) v.resize(n);
    return v.data();
  }
  double* p() { return v.data(); }
};

// ---------------------------------------------------------------------------
// CNN plumbing
// ---------------------------------------------------------------------------

struct CnnNet {
  CnnModel& m;
  Rng dropout_rng;
  std::size_t B = 0;
  bool training = false;
  Buf xt, a1, r1, m1, d1, a2, r2, m2, d2, a3, r3, a4, r4, m4, d4, out, dpred;
  Buf ga1, gd1, ga2, gd2, ga3, ga4, gflat, gr4;

  CnnNet(CnnModel& model, std::uint64_t seed) : m(model), dropout_rng(seed, "cnn.dropout") {}

  // x is [B,30,C]; fills out with one prediction per row.
  void forward(const double* x, std::size_t batch, bool train_mode) {
    B = batch;
    training = train_mode;
    const std::size_t C = m.n_sensors, T = kWindow;
    double* pxt = xt.ensure(B * C * T);
    transpose_windows(x, pxt, B, T, C);

    nn::conv1d_forward(pxt, m.k1.p(), m.b1.p(), a1.ensure(B * 32 * T), B, C, 32, T);
    nn::relu_forward(a1.p(), r1.ensure(B * 32 * T), B * 32 * T);
    nn::dropout_forward(r1.p(), d1.ensure(B * 32 * T), m1.ensure(B * 32 * T), B * 32 * T,
                        kCnnDropout, training, dropout_rng);

    nn::conv1d_forward(d1.p(), m.k2.p(), m.b2.p(), a2.ensure(B * 64 * T), B, 32, 64, T);
    nn::relu_forward(a2.p(), r2.ensure(B * 64 * T), B * 64 * T);
    nn::dropout_forward(r2.p(), d2.ensure(B * 64 * T), m2.ensure(B * 64 * T), B * 64 * T,
                        kCnnDropout, training, dropout_rng);

    nn::conv1d_forward(d2.p(), m.k3.p(), m.b3.p(), a3.ensure(B * 64 * T), B, 64, 64, T);
    nn::relu_forward(a3.p(), r3.ensure(B * 64 * T), B * 64 * T);

    // r3 [B,64,30] doubles as the flattened [B,1920] input of the head
    nn::dense_forward(r3.p(), m.w4.p(), m.b4.p(), a4.ensure(B * 128), B, 64 * T, 128);
    nn::relu_forward(a4.p(), r4.ensure(B * 128), B * 128);
    nn::dropout_forward(r4.p(), d4.ensure(B * 128), m4.ensure(B * 128), B * 128, kCnnDropout,
                        training, dropout_rng);
    nn::dense_forward(d4.p(), m.w5.p(), m.b5.p(), out.ensure(B), B, 128, 1);
  }

  double loss(const double* y) { return nn::mse_loss(out.p(), y, B, dpred.ensure(B)); }

  void backward() {
    const std::size_t C = m.n_sensors, T = kWindow;
    nn::dense_backward(d4.p(), m.w5.p(), dpred.p(), gr4.ensure(B * 128), m.w5.g(), m.b5.g(), B,
                       128, 1);
    nn::dropout_backward(m4.p(), gr4.p(), gr4.p(), B * 128);
    nn::relu_backward(a4.p(), gr4.p(), ga4.ensure(B * 128), B * 128);
    nn::dense_backward(r3.p(), m.w4.p(), ga4.p(), gflat.ensure(B * 64 * T), m.w4.g(), m.b4.g(),
                       B, 64 * T, 128);
    nn::relu_backward(a3.p(), gflat.p(), ga3.ensure(B * 64 * T), B * 64 * T);
    nn::conv1d_backward(d2.p(), m.k3.p(), ga3.p(), gd2.ensure(B * 64 * T), m.k3.g(), m.b3.g(), B,
                        64, 64, T);
    nn::dropout_backward(m2.p(), gd2.p(), gd2.p(), B * 64 * T);
    nn::relu_backward(a2.p(), gd2.p(), ga2.ensure(B * 64 * T), B * 64 * T);
    nn::conv1d_backward(d1.p(), m.k2.p(), ga2.p(), gd1.ensure(B * 32 * T), m.k2.g(), m.b2.g(), B,
                        32, 64, T);
    nn::dropout_backward(m1.p(), gd1.p(), gd1.p(), B * 32 * T);
    nn::relu_backward(a1.p(), gd1.p(), ga1.ensure(B * 32 * T), B * 32 * T);
    nn::conv1d_backward(xt.p(), m.k1.p(), ga1.p(), nullptr, m.k1.g(), m.b1.g(), B, C, 32, T);
  }
};

// ---------------------------------------------------------------------------
// LSTM plumbing
// ---------------------------------------------------------------------------

struct LstmNet {
  LstmModel& m;
  Rng dropout_rng;
  std::size_t B = 0;
  bool training = false;
  nn::LstmCache cache;
  Buf h_all, hT, mh, hd, a1, r1, a2, r2, out, dpred;
  Buf ghd, ga1, gr1, ga2, gr2, dh_all;

  LstmNet(LstmModel& model, std::uint64_t seed) : m(model), dropout_rng(seed, "lstm.dropout") {}

  void forward(const double* x, std::size_t batch, bool train_mode) {
    B = batch;
    training = train_mode;
    const std::size_t C = m.n_sensors, T = kWindow, H = kLstmHidden;
    nn::lstm_forward(x, m.wx.p(), m.wh.p(), m.b.p(), B, T, C, H, cache, h_all.ensure(B * T * H));
    double* phT = hT.ensure(B * H);
    for (std::size_t b = 0; b < B; ++b)
      std::memcpy(phT + b * H, h_all.p() + (b * T + T - 1) * H, H * sizeof(double));
    nn::dropout_forward(phT, hd.ensure(B * H), mh.ensure(B * H), B * H, kLstmDropout, training,
                        dropout_rng);
    nn::dense_forward(hd.p(), m.w1.p(), m.b1.p(), a1.ensure(B * 8), B, H, 8);
    nn::relu_forward(a1.p(), r1.ensure(B * 8), B * 8);
    nn::dense_forward(r1.p(), m.w2.p(), m.b2.p(), a2.ensure(B * 8), B, 8, 8);
    nn::relu_forward(a2.p(), r2.ensure(B * 8), B * 8);
    nn::dense_forward(r2.p(), m.w3.p(), m.b3.p(), out.ensure(B), B, 8, 1);
  }

  double loss(const double* y) { return nn::mse_loss(out.p(), y, B, dpred.ensure(B)); }

  void backward(const double* x) {
    const std::size_t C = m.n_sensors, T = kWindow, H = kLstmHidden;
    nn::dense_backward(r2.p(), m.w3.p(), dpred.p(), gr2.ensure(B * 8), m.w3.g(), m.b3.g(), B, 8,
                       1);
    nn::relu_backward(a2.p(), gr2.p(), ga2.ensure(B * 8), B * 8);
    nn::dense_backward(r1.p(), m.w2.p(), ga2.p(), gr1.ensure(B * 8), m.w2.g(), m.b2.g(), B, 8, 8);
    nn::relu_backward(a1.p(), gr1.p(), ga1.ensure(B * 8), B * 8);
    nn::dense_backward(hd.p(), m.w1.p(), ga1.p(), ghd.ensure(B * H), m.w1.g(), m.b1.g(), B, H, 8);
    nn::dropout_backward(mh.p(), ghd.p(), ghd.p(), B * H);
    double* pdh = dh_all.ensure(B * T * H);
    std::fill(pdh, pdh + B * T * H, 0.0);
    for (std::size_t b = 0; b < B; ++b)
      std::memcpy(pdh + (b * T + T - 1) * H, ghd.p() + b * H, H * sizeof(double));
    nn::lstm_backward(x, m.wx.p(), m.wh.p(), cache, pdh, nullptr, m.wx.g(), m.wh.g(), m.b.g(), B,
                      T, C, H);
  }
};

// ---------------------------------------------------------------------------
// shared training loop
// ---------------------------------------------------------------------------

void check_window_set(const pipeline::WindowSet& ws, std::size_t n_sensors, const char* what) {
  if (ws.window != kWindow)
    throw StructuralError(std::string(what) + ": window length must be 30");
  if (ws.channels != n_sensors)
    throw StructuralError(std::string(what) + ": channel count " + std::to_string(ws.channels) +
                          " does not match model input " + std::to_string(n_sensors));
}

template <typename Net, typename Model>
double eval_loss_impl(Net& net, Model&, const pipeline::WindowSet& ws,
                      const double* /*unused*/) {
  constexpr std::size_t kChunk = 256;
  double sse = 0.0;
  for (std::size_t start = 0; start < ws.n; start += kChunk) {
    const std::size_t b = std::min(kChunk, ws.n - start);
    net.forward(ws.window_at(start), b, /*train_mode=*/false);
    for (std::size_t i = 0; i < b; ++i) {
      const double e = net.out.p()[i] - ws.y[start + i];
      sse += e * e;
    }
  }
  return sse / static_cast<double>(ws.n);
}

template <typename Model, typename Net>
TrainReport train_impl(Model& model, Net& net, const pipeline::WindowSet& train_set,
                       const pipeline::WindowSet& val_set, const TrainConfig& cfg) {
  if (train_set.n == 0) throw Error("training window set is empty");
  if (val_set.n == 0) throw Error("validation window set is empty");
  check_window_set(train_set, model.n_sensors, "train");
  check_window_set(val_set, model.n_sensors, "validation");
  if (cfg.batch_size == 0) throw ValueError("batch_size must be positive");

  const auto t0 = std::chrono::steady_clock::now();
  auto params = model.params();
  const auto is_weight = model.param_is_weight();
  for (nn::Tensor* p : params) p->alloc_grad();

  nn::RmspropConfig rms;
  rms.lr = cfg.lr;
  rms.weight_decay = cfg.weight_decay;
  std::vector<std::vector<double>> acc;
  for (nn::Tensor* p : params) acc.emplace_back(p->data.size(), 0.0);

  nn::PlateauScheduler sched;
  sched.factor = cfg.sched_factor;
  sched.patience = cfg.sched_patience;
  nn::EarlyStopper stopper;
  stopper.patience = cfg.early_patience;
  stopper.max_epochs = cfg.max_epochs;

  Rng shuffle_rng(cfg.seed, "train.shuffle");
  double lr = cfg.lr;
  TrainReport report;

  std::vector<std::size_t> order(train_set.n);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const std::size_t row = train_set.window * train_set.channels;
  std::vector<double> bx(cfg.batch_size * row);
  std::vector<double> by(cfg.batch_size);

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double sse = 0.0;
    for (std::size_t start = 0; start < train_set.n; start += cfg.batch_size) {
      const std::size_t b = std::min(cfg.batch_size, train_set.n - start);
      for (std::size_t i = 0; i < b; ++i) {
        std::memcpy(bx.data() + i * row, train_set.window_at(order[start + i]),
                    row * sizeof(double));
        by[i] = train_set.y[order[start + i]];
      }
      for (nn::Tensor* p : params) p->zero_grad();
      net.forward(bx.data(), b, /*train_mode=*/true);
      const double batch_loss = net.loss(by.data());
      if (!std::isfinite(batch_loss))
        throw NumericError("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(start / cfg.batch_size));
      if constexpr (std::is_same_v<Net, LstmNet>)
        net.backward(bx.data());
      else
        net.backward();
      for (std::size_t i = 0; i < params.size(); ++i)
        nn::rmsprop_step(params[i]->p(), params[i]->g(), acc[i].data(), params[i]->data.size(),
                         rms, lr, is_weight[i] ? cfg.weight_decay : 0.0);
      sse += batch_loss * static_cast<double>(b);
    }
    const double train_loss = sse / static_cast<double>(train_set.n);
    const double val_loss = eval_loss_impl(net, model, val_set, nullptr);
    if (!std::isfinite(val_loss))
      throw NumericError("validation loss diverged at epoch " + std::to_string(epoch));

    report.train_loss.push_back(train_loss);
    report.val_loss.push_back(val_loss);
    report.lr.push_back(lr);
    report.stopped_epoch = epoch;

    const bool stop = stopper.step(val_loss, params, epoch);
    lr = sched.step(val_loss, lr);
    if (stop) break;
  }

  stopper.restore(params);
  report.best_epoch = stopper.best_epoch;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

template <typename Net>
std::vector<double> predict_impl(Net& net, const pipeline::WindowSet& ws) {
  std::vector<double> out(ws.n);
  constexpr std::size_t kChunk = 256;
  for (std::size_t start = 0; start < ws.n; start += kChunk) {
    const std::size_t b = std::min(kChunk, ws.n - start);
    net.forward(ws.window_at(start), b, /*train_mode=*/false);
    std::memcpy(out.data() + start, net.out.p(), b * sizeof(double));
  }
  return out;
}

// ---------------------------------------------------------------------------
// checkpoint helpers
// ---------------------------------------------------------------------------

void require_little_endian() {
  const std::uint16_t probe = 1;
  if (*reinterpret_cast<const std::uint8_t*>(&probe) != 1)
    throw Error("checkpoint format requires a little-endian host");
}

void write_checkpoint(const std::string& path, const std::string& kind, std::size_t n_sensors,
                      std::uint64_t config_hash,
                      const std::vector<const nn::Tensor*>& tensors,
                      const std::vector<std::string>& names) {
  require_little_endian();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw StructuralError("cannot write " + path);
  auto put = [&](const void* p, std::size_t len) {
    f.write(static_cast<const char*>(p), static_cast<std::streamsize>(len));
  };
  put(kCkptMagic, sizeof kCkptMagic);
  const std::uint32_t kind_len = static_cast<std::uint32_t>(kind.size());
  put(&kind_len, sizeof kind_len);
  put(kind.data(), kind.size());
  const std::uint64_t ns = n_sensors;
  put(&ns, sizeof ns);
  put(&config_hash, sizeof config_hash);
  const std::uint64_t count = tensors.size();
  put(&count, sizeof count);
  std::uint64_t offset = 0;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const std::uint32_t name_len = static_cast<std::uint32_t>(names[i].size());
    put(&name_len, sizeof name_len);
    put(names[i].data(), names[i].size());
    const std::uint32_t ndim = static_cast<std::uint32_t>(tensors[i]->shape.size());
    put(&ndim, sizeof ndim);
    for (std::size_t d : tensors[i]->shape) {
      const std::uint64_t dim = d;
      put(&dim, sizeof dim);
    }
    put(&offset, sizeof offset);
    offset += tensors[i]->data.size();
  }
  put(&offset, sizeof offset);  // total doubles
  for (const nn::Tensor* t : tensors) put(t->data.data(), t->data.size() * sizeof(double));
  if (!f) throw StructuralError("short write to " + path);
}

struct CkptEntry {
  std::string name;
  std::vector<std::size_t> shape;
  std::uint64_t offset = 0;
};

struct Ckpt {
  std::string kind;
  std::size_t n_sensors = 0;
  std::uint64_t config_hash = 0;
  std::vector<CkptEntry> entries;
  std::vector<double> data;

  void load_into(nn::Tensor& t, const std::string& name) const {
    for (const CkptEntry& e : entries) {
      if (e.name != name) continue;
      t.shape = e.shape;
      const std::size_t n = t.numel();
      if (e.offset + n > data.size())
        throw StructuralError("checkpoint tensor '" + name + "' extends past the data block");
      t.data.assign(data.begin() + e.offset, data.begin() + e.offset + n);
      return;
    }
    throw ConfigError("checkpoint is missing tensor '" + name + "'");
  }
};

Ckpt read_checkpoint(const std::string& path) {
  require_little_endian();
  std::ifstream f(path, std::ios::binary);
  if (!f) throw StructuralError("cannot open " + path);
  auto get = [&](void* p, std::size_t len) {
    f.read(static_cast<char*>(p), static_cast<std::streamsize>(len));
    if (!f) throw StructuralError("truncated checkpoint " + path);
  };
  char magic[8];
  get(magic, sizeof magic);
  if (std::memcmp(magic, kCkptMagic, sizeof magic) != 0)
    throw ConfigError(path + " is not a model checkpoint");
  Ckpt c;
  std::uint32_t kind_len = 0;
  get(&kind_len, sizeof kind_len);
  c.kind.resize(kind_len);
  get(c.kind.data(), kind_len);
  std::uint64_t ns = 0;
  get(&ns, sizeof ns);
  c.n_sensors = ns;
  get(&c.config_hash, sizeof c.config_hash);
  std::uint64_t count = 0;
  get(&count, sizeof count);
  for (std::uint64_t i = 0; i < count; ++i) {
    CkptEntry e;
    std::uint32_t name_len = 0;
    get(&name_len, sizeof name_len);
    e.name.resize(name_len);
    get(e.name.data(), name_len);
    std::uint32_t ndim = 0;
    get(&ndim, sizeof ndim);
    for (std::uint32_t d = 0; d < ndim; ++d) {
      std::uint64_t dim = 0;
      get(&dim, sizeof dim);
      e.shape.push_back(dim);
    }
    get(&e.offset, sizeof e.offset);
    c.entries.push_back(std::move(e));
  }
  std::uint64_t total = 0;
  get(&total, sizeof total);
  c.data.resize(total);
  get(c.data.data(), total * sizeof(double));
  return c;
}

}  // namespace

// ---------------------------------------------------------------------------
// model definitions
// ---------------------------------------------------------------------------

std::vector<nn::Tensor*> CnnModel::params() {
  return {&k1, &b1, &k2, &b2, &k3, &b3, &w4, &b4, &w5, &b5};
}
std::vector<const nn::Tensor*> CnnModel::params() const {
  return {&k1, &b1, &k2, &b2, &k3, &b3, &w4, &b4, &w5, &b5};
}
std::vector<std::string> CnnModel::param_names() const {
  return {"conv1.k", "conv1.b", "conv2.k", "conv2.b", "conv3.k",
          "conv3.b", "dense1.w", "dense1.b", "dense2.w", "dense2.b"};
}
std::vector<bool> CnnModel::param_is_weight() const {
  return {true, false, true, false, true, false, true, false, true, false};
}
std::size_t CnnModel::param_count() const {
  std::size_t n = 0;
  for (const nn::Tensor* t : params()) n += t->data.size();
  return n;
}

std::vector<nn::Tensor*> LstmModel::params() {
  return {&wx, &wh, &b, &w1, &b1, &w2, &b2, &w3, &b3};
}
std::vector<const nn::Tensor*> LstmModel::params() const {
  return {&wx, &wh, &b, &w1, &b1, &w2, &b2, &w3, &b3};
}
std::vector<std::string> LstmModel::param_names() const {
  return {"lstm.wx", "lstm.wh", "lstm.b", "head1.w", "head1.b",
          "head2.w", "head2.b", "head3.w", "head3.b"};
}
std::vector<bool> LstmModel::param_is_weight() const {
  return {true, true, false, true, false, true, false, true, false};
}
std::size_t LstmModel::param_count() const {
  std::size_t n = 0;
  for (const nn::Tensor* t : params()) n += t->data.size();
  return n;
}

CnnModel build_cnn(std::size_t n_sensors, std::uint64_t seed) {
  if (n_sensors == 0) throw ValueError("build_cnn: n_sensors must be positive");
  CnnModel m;
  m.n_sensors = n_sensors;
  m.k1 = nn::Tensor({32, n_sensors, 3});
  m.b1 = nn::Tensor({32});
  m.k2 = nn::Tensor({64, 32, 3});
  m.b2 = nn::Tensor({64});
  m.k3 = nn::Tensor({64, 64, 3});
  m.b3 = nn::Tensor({64});
  m.w4 = nn::Tensor({64 * kWindow, 128});
  m.b4 = nn::Tensor({128});
  m.w5 = nn::Tensor({128, 1});
  m.b5 = nn::Tensor({1});

  Rng c1(seed, "cnn.conv1");
  init_uniform(m.k1, glorot_limit(n_sensors * 3, 32 * 3), c1);
  Rng c2(seed, "cnn.conv2");
  init_uniform(m.k2, glorot_limit(32 * 3, 64 * 3), c2);
  Rng c3(seed, "cnn.conv3");
  init_uniform(m.k3, glorot_limit(64 * 3, 64 * 3), c3);
  Rng d1(seed, "cnn.dense1");
  init_uniform(m.w4, glorot_limit(64 * kWindow, 128), d1);
  Rng d2(seed, "cnn.dense2");
  init_uniform(m.w5, glorot_limit(128, 1), d2);
  return m;
}

LstmModel build_lstm(std::size_t n_sensors, std::uint64_t seed) {
  if (n_sensors == 0) throw ValueError("build_lstm: n_sensors must be positive");
  const std::size_t H = kLstmHidden;
  LstmModel m;
  m.n_sensors = n_sensors;
  m.wx = nn::Tensor({n_sensors, 4 * H});
  m.wh = nn::Tensor({H, 4 * H});
  m.b = nn::Tensor({4 * H});
  m.w1 = nn::Tensor({H, 8});
  m.b1 = nn::Tensor({8});
  m.w2 = nn::Tensor({8, 8});
  m.b2 = nn::Tensor({8});
  m.w3 = nn::Tensor({8, 1});
  m.b3 = nn::Tensor({1});

  Rng gates(seed, "lstm.gates");
  const double limit = 1.0 / std::sqrt(static_cast<double>(H));
  init_uniform(m.wx, limit, gates);
  init_uniform(m.wh, limit, gates);
  // forget-gate bias starts at 1 so early training does not flush the cell
  for (std::size_t j = H; j < 2 * H; ++j) m.b.data[j] = 1.0;

  Rng h1(seed, "lstm.head1");
  init_uniform(m.w1, glorot_limit(H, 8), h1);
  Rng h2(seed, "lstm.head2");
  init_uniform(m.w2, glorot_limit(8, 8), h2);
  Rng h3(seed, "lstm.head3");
  init_uniform(m.w3, glorot_limit(8, 1), h3);
  return m;
}

TrainReport train(CnnModel& model, const pipeline::WindowSet& train_set,
                  const pipeline::WindowSet& val_set, const TrainConfig& cfg) {
  CnnNet net(model, cfg.seed);
  return train_impl(model, net, train_set, val_set, cfg);
}

TrainReport train(LstmModel& model, const pipeline::WindowSet& train_set,
                  const pipeline::WindowSet& val_set, const TrainConfig& cfg) {
  LstmNet net(model, cfg.seed);
  return train_impl(model, net, train_set, val_set, cfg);
}

std::vector<double> predict_rul(const CnnModel& model, const pipeline::WindowSet& ws) {
  if (ws.n == 0) return {};
  check_window_set(ws, model.n_sensors, "predict");
  CnnNet net(const_cast<CnnModel&>(model), 0);
  return predict_impl(net, ws);
}

std::vector<double> predict_rul(const LstmModel& model, const pipeline::WindowSet& ws) {
  if (ws.n == 0) return {};
  check_window_set(ws, model.n_sensors, "predict");
  LstmNet net(const_cast<LstmModel&>(model), 0);
  return predict_impl(net, ws);
}

std::vector<double> final_hidden(const LstmModel& model, const pipeline::WindowSet& ws) {
  check_window_set(ws, model.n_sensors, "final_hidden");
  LstmNet net(const_cast<LstmModel&>(model), 0);
  std::vector<double> out(ws.n * kLstmHidden);
  constexpr std::size_t kChunk = 256;
  for (std::size_t start = 0; start < ws.n; start += kChunk) {
    const std::size_t b = std::min(kChunk, ws.n - start);
    net.forward(ws.window_at(start), b, /*train_mode=*/false);
    std::memcpy(out.data() + start * kLstmHidden, net.hT.p(), b * kLstmHidden * sizeof(double));
  }
  return out;
}

std::vector<double> cnn_forward_channels_first(const CnnModel& model, const double* xt,
                                               std::size_t batch) {
  CnnNet net(const_cast<CnnModel&>(model), 0);
  // re-run the stack on pre-transposed input
  const std::size_t C = model.n_sensors, T = kWindow, B = batch;
  net.B = B;
  net.training = false;
  std::memcpy(net.xt.ensure(B * C * T), xt, B * C * T * sizeof(double));
  nn::conv1d_forward(net.xt.p(), model.k1.p(), model.b1.p(), net.a1.ensure(B * 32 * T), B, C, 32,
                     T);
  nn::relu_forward(net.a1.p(), net.r1.ensure(B * 32 * T), B * 32 * T);
  nn::dropout_forward(net.r1.p(), net.d1.ensure(B * 32 * T), net.m1.ensure(B * 32 * T),
                      B * 32 * T, kCnnDropout, false, net.dropout_rng);
  nn::conv1d_forward(net.d1.p(), model.k2.p(), model.b2.p(), net.a2.ensure(B * 64 * T), B, 32, 64,
                     T);
  nn::relu_forward(net.a2.p(), net.r2.ensure(B * 64 * T), B * 64 * T);
  nn::dropout_forward(net.r2.p(), net.d2.ensure(B * 64 * T), net.m2.ensure(B * 64 * T),
                      B * 64 * T, kCnnDropout, false, net.dropout_rng);
  nn::conv1d_forward(net.d2.p(), model.k3.p(), model.b3.p(), net.a3.ensure(B * 64 * T), B, 64, 64,
                     T);
  nn::relu_forward(net.a3.p(), net.r3.ensure(B * 64 * T), B * 64 * T);
  nn::dense_forward(net.r3.p(), model.w4.p(), model.b4.p(), net.a4.ensure(B * 128), B, 64 * T,
                    128);
  nn::relu_forward(net.a4.p(), net.r4.ensure(B * 128), B * 128);
  nn::dropout_forward(net.r4.p(), net.d4.ensure(B * 128), net.m4.ensure(B * 128), B * 128,
                      kCnnDropout, false, net.dropout_rng);
  nn::dense_forward(net.d4.p(), model.w5.p(), model.b5.p(), net.out.ensure(B), B, 128, 1);
  return {net.out.p(), net.out.p() + B};
}

double cnn_loss_and_grad(CnnModel& model, const double* x, const double* y, std::size_t batch) {
  for (nn::Tensor* p : model.params()) {
    if (p->grad.size() != p->data.size()) p->alloc_grad();
    p->zero_grad();
  }
  CnnNet net(model, 0);
  net.forward(x, batch, /*train_mode=*/false);
  const double l = net.loss(y);
  net.backward();
  return l;
}

double cnn_loss(const CnnModel& model, const double* x, const double* y, std::size_t batch) {
  CnnNet net(const_cast<CnnModel&>(model), 0);
  net.forward(x, batch, /*train_mode=*/false);
  return net.loss(y);
}

double lstm_loss_and_grad(LstmModel& model, const double* x, const double* y,
                          std::size_t batch) {
  for (nn::Tensor* p : model.params()) {
    if (p->grad.size() != p->data.size()) p->alloc_grad();
    p->zero_grad();
  }
  LstmNet net(model, 0);
  net.forward(x, batch, /*train_mode=*/false);
  const double l = net.loss(y);
  net.backward(x);
  return l;
}

double lstm_loss(const LstmModel& model, const double* x, const double* y, std::size_t batch) {
  LstmNet net(const_cast<LstmModel&>(model), 0);
  net.forward(x, batch, /*train_mode=*/false);
  return net.loss(y);
}

// ---------------------------------------------------------------------------
// checkpoints
// ---------------------------------------------------------------------------

void save_checkpoint(const CnnModel& model, const std::string& path,
                     std::uint64_t config_hash) {
  write_checkpoint(path, "cnn", model.n_sensors, config_hash, model.params(),
                   model.param_names());
}

void save_checkpoint(const LstmModel& model, const std::string& path,
                     std::uint64_t config_hash) {
  write_checkpoint(path, "lstm", model.n_sensors, config_hash, model.params(),
                   model.param_names());
}

ModelKind checkpoint_kind(const std::string& path) {
  const Ckpt c = read_checkpoint(path);
  if (c.kind == "cnn") return ModelKind::cnn;
  if (c.kind == "lstm") return ModelKind::lstm;
  throw ConfigError("unknown checkpoint kind '" + c.kind + "'");
}

CnnModel load_cnn_checkpoint(const std::string& path) {
  const Ckpt c = read_checkpoint(path);
  if (c.kind != "cnn") throw ConfigError(path + " is a '" + c.kind + "' checkpoint, not cnn");
  CnnModel m = build_cnn(c.n_sensors, 0);
  const auto names = m.param_names();
  const auto params = m.params();
  for (std::size_t i = 0; i < params.size(); ++i) c.load_into(*params[i], names[i]);
  return m;
}

LstmModel load_lstm_checkpoint(const std::string& path) {
  const Ckpt c = read_checkpoint(path);
  if (c.kind != "lstm") throw ConfigError(path + " is a '" + c.kind + "' checkpoint, not lstm");
  LstmModel m = build_lstm(c.n_sensors, 0);
  const auto names = m.param_names();
  const auto params = m.params();
  for (std::size_t i = 0; i < params.size(); ++i) c.load_into(*params[i], names[i]);
  return m;
}

void write_train_report_csv(const TrainReport& report, const std::string& path,
                            std::uint64_t config_hash) {
  std::ofstream f(path);
  if (!f) throw StructuralError("cannot write " + path);
  char hex[40];
  std::snprintf(hex, sizeof hex, "# config %016llx\n",
                static_cast<unsigned long long>(config_hash));
  f << hex << "epoch,train_loss,val_loss,lr\n";
  auto append = [](std::string& line, double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    line.append(buf, ptr);
  };
  std::string line;
  for (std::size_t i = 0; i < report.val_loss.size(); ++i) {
    line = std::to_string(i + 1);
    line += ',';
    append(line, report.train_loss[i]);
    line += ',';
    append(line, report.val_loss[i]);
    line += ',';
    append(line, report.lr[i]);
    line += '\n';
    f << line;
  }
}

}  // namespace rul::models
