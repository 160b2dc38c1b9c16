#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace gaitpipe::nn {

// NHWC: batch, height, width, channels.
struct Shape {
  std::size_t n = 0, h = 0, w = 0, c = 0;

  std::size_t size() const { return n * h * w * c; }
  std::size_t per_item() const { return h * w * c; }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(Shape shape, double fill = 0.0) : shape_(shape), values_(shape.size(), fill) {}
  Tensor4(Shape shape, std::vector<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return values_.size(); }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  double& at(std::size_t n, std::size_t h, std::size_t w, std::size_t c) {
    return values_[((n * shape_.h + h) * shape_.w + w) * shape_.c + c];
  }
  double at(std::size_t n, std::size_t h, std::size_t w, std::size_t c) const {
    return values_[((n * shape_.h + h) * shape_.w + w) * shape_.c + c];
  }

  // Copies the listed batch items into a new tensor.
  Tensor4 gather(std::span<const std::size_t> items) const;

  bool all_finite() const;

 private:
  Shape shape_;
  std::vector<double> values_;
};

}  // namespace gaitpipe::nn
