#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gaitpipe/nn/network.hpp"

namespace gaitpipe::nn {

struct LossResult {
  double mse = 0.0;
  double rmse = 0.0;
  std::vector<double> grad;  // d(mse)/d(pred)
};

LossResult mse_loss(std::span<const double> pred, std::span<const double> target);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}
  void step(std::span<Param* const> params);

 private:
  AdamConfig config_;
  std::vector<std::vector<double>> m_, v_;
  std::uint64_t t_ = 0;
};

struct TrainConfig {
  int epochs = 100;
  std::size_t batch_size = 64;
  AdamConfig adam;
  std::uint64_t seed = 1;  // shuffling and dropout
};

struct TrainResult {
  Network model;
  std::vector<double> loss_history;  // mean training MSE per completed epoch
  bool diverged = false;
  std::string message;
};

// Mini-batch Adam. A trailing batch of one item is merged into the previous
// batch because batch normalization needs at least two. On a non-finite loss
// the model from the last completed epoch is returned with `diverged` set.
TrainResult train(Network model, const Tensor4& inputs, std::span<const double> targets, const TrainConfig& config);

}  // namespace gaitpipe::nn
