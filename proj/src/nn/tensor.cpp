#include "gaitpipe/nn/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "gaitpipe/error.hpp"

namespace gaitpipe::nn {

std::string Shape::str() const {
  return std::to_string(n) + "x" + std::to_string(h) + "x" + std::to_string(w) + "x" + std::to_string(c);
}

Tensor4::Tensor4(Shape shape, std::vector<double> values) : shape_(shape), values_(std::move(values)) {
  if (values_.size() != shape_.size())
    throw Error(ErrorCode::ShapeMismatch, "tensor of shape " + shape_.str() + " given " +
                                              std::to_string(values_.size()) + " values");
}

Tensor4 Tensor4::gather(std::span<const std::size_t> items) const {
  Shape s = shape_;
  s.n = items.size();
  Tensor4 out(s);
  const std::size_t per = shape_.per_item();
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i] >= shape_.n) throw Error(ErrorCode::ShapeMismatch, "batch index out of range");
    std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(items[i] * per), per,
                out.values_.begin() + static_cast<std::ptrdiff_t>(i * per));
  }
  return out;
}

bool Tensor4::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace gaitpipe::nn
