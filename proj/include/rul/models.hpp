// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rul/nn.hpp"
#include "rul/pipeline.hpp"
#include "rul/tensor.hpp"

namespace rul::models {

inline constexpr std::size_t kWindow = 30;
inline constexpr std::size_t kLstmHidden = 32;

/// Conv stack n -> 32 -> 64 -> 64 (kernel 3, same padding, dropout 0.3 after
/// the first two), then flatten(64*30) -> 128 -> 1 with dropout 0.3 after the
/// first dense ReLU. Consumes windows transposed to (sensors, window).
struct CnnModel {
  std::size_t n_sensors = 0;
  nn::Tensor k1, b1, k2, b2, k3, b3, w4, b4, w5, b5;

  std::vector<nn::Tensor*> params();
  std::vector<const nn::Tensor*> params() const;
  std::vector<std::string> param_names() const;
  std::vector<bool> param_is_weight() const;  // weight decay applies to these
  std::size_t param_count() const;
};

/// Single LSTM layer n -> 32; dropout 0.5 on h_T; head 32 -> 8 -> 8 -> 1.
struct LstmModel {
  std::size_t n_sensors = 0;
  nn::Tensor wx, wh, b, w1, b1, w2, b2, w3, b3;

  std::vector<nn::Tensor*> params();
  std::vector<const nn::Tensor*> params() const;
  std::vector<std::string> param_names() const;
  std::vector<bool> param_is_weight() const;
  std::size_t param_count() const;
};

struct TrainConfig {
  std::size_t batch_size = 64;
  double lr = 0.001;
  double weight_decay = 1e-5;
  int max_epochs = 200;
  double sched_factor = 0.5;
  int sched_patience = 5;
  int early_patience = 20;
  std::uint64_t seed = 42;
};

struct TrainReport {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::vector<double> lr;
  int best_epoch = -1;    // 1-based
  int stopped_epoch = 0;  // last epoch run, 1-based
  double wall_seconds = 0.0;
};

CnnModel build_cnn(std::size_t n_sensors, std::uint64_t seed);
LstmModel build_lstm(std::size_t n_sensors, std::uint64_t seed);

/// Shared protocol: seeded shuffle, batches of batch_size (final partial
/// batch kept), MSE + RMSprop, plateau scheduler and early stopping driven by
/// the epoch-end validation loss. Returns the best-checkpoint model in place.
TrainReport train(CnnModel& model, const pipeline::WindowSet& train_set,
                  const pipeline::WindowSet& val_set, const TrainConfig& cfg);
TrainReport train(LstmModel& model, const pipeline::WindowSet& train_set,
                  const pipeline::WindowSet& val_set, const TrainConfig& cfg);

/// Inference with dropout disabled; one scalar per window, no clipping.
std::vector<double> predict_rul(const CnnModel& model, const pipeline::WindowSet& ws);
std::vector<double> predict_rul(const LstmModel& model, const pipeline::WindowSet& ws);

/// Final-step hidden state h_T per window, row-major [n, 32].
std::vector<double> final_hidden(const LstmModel& model, const pipeline::WindowSet& ws);

/// Test hook for the layout contract: forward on channels-first input
/// xt [B, n_sensors, 30], bypassing the internal transpose.
std::vector<double> cnn_forward_channels_first(const CnnModel& model, const double* xt,
                                               std::size_t batch);

// Gradient-verification hooks: forward + MSE with dropout disabled.
// The *_loss_and_grad variants also fill every parameter's grad buffer.
double cnn_loss_and_grad(CnnModel& model, const double* x, const double* y, std::size_t batch);
double cnn_loss(const CnnModel& model, const double* x, const double* y, std::size_t batch);
double lstm_loss_and_grad(LstmModel& model, const double* x, const double* y,
                          std::size_t batch);
double lstm_loss(const LstmModel& model, const double* x, const double* y, std::size_t batch);

// Checkpoints: flat little-endian binary with a named-tensor header table.
// config_hash stamps the file like the CSV header comments do.
enum class ModelKind { cnn, lstm };

void save_checkpoint(const CnnModel& model, const std::string& path,
                     std::uint64_t config_hash = 0);
void save_checkpoint(const LstmModel& model, const std::string& path,
                     std::uint64_t config_hash = 0);
ModelKind checkpoint_kind(const std::string& path);
CnnModel load_cnn_checkpoint(const std::string& path);
LstmModel load_lstm_checkpoint(const std::string& path);

void write_train_report_csv(const TrainReport& report, const std::string& path,
                            std::uint64_t config_hash);

}  // namespace rul::models
