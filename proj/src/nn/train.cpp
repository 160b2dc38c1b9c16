#include "gaitpipe/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gaitpipe/error.hpp"

namespace gaitpipe::nn {

LossResult mse_loss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size() || pred.empty())
    throw Error(ErrorCode::ShapeMismatch, "loss: " + std::to_string(pred.size()) + " predictions vs " +
                                              std::to_string(target.size()) + " targets");
  LossResult r;
  r.grad.resize(pred.size());
  const double n = static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - target[i];
    r.mse += e * e;
    r.grad[i] = 2.0 * e / n;
  }
  r.mse /= n;
  r.rmse = std::sqrt(r.mse);
  return r;
}

void Adam::step(std::span<Param* const> params) {
  if (m_.empty()) {
    for (const auto* p : params) {
      m_.emplace_back(p->value.size(), 0.0);
      v_.emplace_back(p->value.size(), 0.0);
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = *params[k];
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
      p.value[i] -= config_.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.epsilon);
    }
  }
}

TrainResult train(Network model, const Tensor4& inputs, std::span<const double> targets, const TrainConfig& config) {
  const std::size_t n = inputs.shape().n;
  if (n == 0) throw Error(ErrorCode::EmptyDataset, "training set is empty");
  if (targets.size() != n)
    throw Error(ErrorCode::ShapeMismatch, "training set has " + std::to_string(n) + " inputs and " +
                                              std::to_string(targets.size()) + " targets");
  if (n < 2) throw Error(ErrorCode::BatchTooSmall, "training needs at least two images");
  if (config.batch_size < 2) throw Error(ErrorCode::BatchTooSmall, "batch size must be at least 2");
  if (config.epochs < 0) throw Error(ErrorCode::InvalidArgument, "epoch count must be >= 0");

  std::mt19937_64 shuffle_rng(config.seed);
  model.reseed_dropout(config.seed ^ 0x9E3779B97F4A7C15ULL);
  Adam optimizer(config.adam);

  TrainResult result;
  Network checkpoint = model;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    std::vector<std::pair<std::size_t, std::size_t>> batches;
    for (std::size_t begin = 0; begin < n; begin += config.batch_size)
      batches.emplace_back(begin, std::min(n, begin + config.batch_size));
    if (batches.size() > 1 && batches.back().second - batches.back().first < 2) {
      batches[batches.size() - 2].second = n;
      batches.pop_back();
    }

    double epoch_loss = 0.0;
    bool finite = true;
    for (const auto& [begin, end] : batches) {
      const std::span<const std::size_t> items(order.data() + begin, end - begin);
      const Tensor4 x = inputs.gather(items);
      std::vector<double> y(items.size());
      for (std::size_t i = 0; i < items.size(); ++i) y[i] = targets[items[i]];

      model.zero_grad();
      const Tensor4 pred = model.forward(x, Mode::Train);
      const auto loss = mse_loss(pred.values(), y);
      if (!std::isfinite(loss.mse)) {
        finite = false;
        break;
      }
      model.backward(Tensor4(pred.shape(), loss.grad));
      optimizer.step(model.params());
      epoch_loss += loss.mse * static_cast<double>(items.size());
    }

    if (!finite) {
      result.model = std::move(checkpoint);
      result.diverged = true;
      result.message = "training loss became non-finite in epoch " + std::to_string(epoch + 1);
      return result;
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(n));
    checkpoint = model;
  }
  result.model = std::move(model);
  return result;
}

}  // namespace gaitpipe::nn
