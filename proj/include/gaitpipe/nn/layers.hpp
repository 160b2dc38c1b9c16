#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gaitpipe/nn/tensor.hpp"

namespace gaitpipe::nn {

enum class Mode { Train, Infer };

struct Param {
  std::string name;
  std::vector<double> value;
  std::vector<double> grad;

  Param() = default;
  Param(std::string n, std::size_t size) : name(std::move(n)), value(size, 0.0), grad(size, 0.0) {}
  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

// 2x2 cross-correlation, stride 1, "same" padding: one zero row at the bottom
// and one zero column at the right, so output(h, w) reads input rows h, h+1
// and columns w, w+1. Kernel layout is [kh][kw][in][out].
class Conv2d {
 public:
  static constexpr std::size_t kKernel = 2;

  Conv2d(std::size_t in_channels, std::size_t out_channels);

  Shape output_shape(const Shape& in) const;
  Tensor4 forward(const Tensor4& input, Mode mode);
  Tensor4 infer(const Tensor4& input) const;
  Tensor4 backward(const Tensor4& grad_out);

  std::size_t in_channels() const { return in_; }
  std::size_t out_channels() const { return out_; }
  Param& kernel() { return kernel_; }
  Param& bias() { return bias_; }
  const Param& kernel() const { return kernel_; }
  const Param& bias() const { return bias_; }

 private:
  void check_input(const Shape& in) const;
  std::vector<double> im2col(const Tensor4& input) const;

  std::size_t in_, out_;
  Param kernel_, bias_;
  Shape cached_in_;
  std::vector<double> cached_cols_;
};

class BatchNorm {
 public:
  static constexpr double kEpsilon = 1e-5;
  static constexpr double kMomentum = 0.1;

  explicit BatchNorm(std::size_t channels);

  Shape output_shape(const Shape& in) const { return in; }
  Tensor4 forward(const Tensor4& input, Mode mode);
  Tensor4 infer(const Tensor4& input) const;
  Tensor4 backward(const Tensor4& grad_out);

  std::size_t channels() const { return channels_; }
  Param& gamma() { return gamma_; }
  Param& beta() { return beta_; }
  const Param& gamma() const { return gamma_; }
  const Param& beta() const { return beta_; }
  std::vector<double>& running_mean() { return running_mean_; }
  std::vector<double>& running_var() { return running_var_; }
  const std::vector<double>& running_mean() const { return running_mean_; }
  const std::vector<double>& running_var() const { return running_var_; }

 private:
  std::size_t channels_;
  Param gamma_, beta_;
  std::vector<double> running_mean_, running_var_;
  Mode cached_mode_ = Mode::Infer;
  Shape cached_shape_;
  std::vector<double> cached_xhat_;
  std::vector<double> cached_inv_std_;
};

class Relu {
 public:
  Shape output_shape(const Shape& in) const { return in; }
  Tensor4 forward(const Tensor4& input, Mode mode);
  Tensor4 infer(const Tensor4& input) const;
  Tensor4 backward(const Tensor4& grad_out);

 private:
  std::vector<unsigned char> active_;
  Shape cached_shape_;
};

// 2x2 window, stride 1, no padding. Ties route the gradient to the first
// element in row-major order.
class MaxPool {
 public:
  Shape output_shape(const Shape& in) const;
  Tensor4 forward(const Tensor4& input, Mode mode);
  Tensor4 infer(const Tensor4& input) const;
  Tensor4 backward(const Tensor4& grad_out);

 private:
  Tensor4 run(const Tensor4& input, std::vector<std::size_t>* argmax) const;

  Shape cached_in_;
  std::vector<std::size_t> argmax_;
};

// Inverted dropout: kept activations are scaled by 1/(1-rate) during training.
class Dropout {
 public:
  explicit Dropout(double rate, std::uint64_t seed = 0);

  Shape output_shape(const Shape& in) const { return in; }
  Tensor4 forward(const Tensor4& input, Mode mode);
  Tensor4 infer(const Tensor4& input) const { return input; }
  Tensor4 backward(const Tensor4& grad_out);

  double rate() const { return rate_; }
  void reseed(std::uint64_t seed) { rng_.seed(seed); }

 private:
  double rate_;
  std::mt19937_64 rng_;
  std::vector<double> scale_;
};

// Fully connected over the flattened per-item features.
class Dense {
 public:
  Dense(std::size_t in_features, std::size_t out_features);

  Shape output_shape(const Shape& in) const;
  Tensor4 forward(const Tensor4& input, Mode mode);
  Tensor4 infer(const Tensor4& input) const;
  Tensor4 backward(const Tensor4& grad_out);

  std::size_t in_features() const { return in_; }
  std::size_t out_features() const { return out_; }
  Param& weight() { return weight_; }
  Param& bias() { return bias_; }
  const Param& weight() const { return weight_; }
  const Param& bias() const { return bias_; }

 private:
  std::size_t in_, out_;
  Param weight_, bias_;
  Tensor4 cached_input_;
};

}  // namespace gaitpipe::nn
