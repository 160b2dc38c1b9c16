#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gaitpipe/nn/layers.hpp"
#include "gaitpipe/nn/tensor.hpp"

namespace gaitpipe::nn {

using Layer = std::variant<Conv2d, BatchNorm, Relu, MaxPool, Dropout, Dense>;

std::string layer_name(const Layer& layer);

class Network {
 public:
  Network() = default;
  // `input` is the per-item shape (n is ignored). Throws ShapeMismatch if the
  // layers do not chain.
  Network(Shape input, std::vector<Layer> layers);

  Tensor4 forward(const Tensor4& input, Mode mode);
  Tensor4 infer(const Tensor4& input) const;
  // Accumulates parameter gradients; returns the gradient w.r.t. the input.
  Tensor4 backward(const Tensor4& grad_out);

  std::vector<Param*> params();
  std::vector<const Param*> params() const;
  void zero_grad();
  std::size_t parameter_count() const;

  // Per-layer output shapes for a single item.
  std::vector<Shape> shape_chain() const;
  // Layer list with shapes and padding conventions; stored in model files.
  std::string fingerprint() const;

  const Shape& input_shape() const { return input_; }
  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  void reseed_dropout(std::uint64_t seed);

 private:
  Shape input_;
  std::vector<Layer> layers_;
};

inline constexpr double kDropoutRate = 0.2;

// Four conv(2x2, same)/batchnorm/relu groups with (16, 32, 48, 64) filters,
// 2x2 stride-1 max pooling after the first three, dropout, and a one-output
// dense regression head, for 45x4x1 gait images. He-normal initialization.
Network make_speed_network(std::uint64_t seed, double dropout_rate = kDropoutRate);

// Infer-mode prediction, one item at a time so each output depends only on its own input.
std::vector<double> predict(const Network& network, const Tensor4& inputs);

}  // namespace gaitpipe::nn
