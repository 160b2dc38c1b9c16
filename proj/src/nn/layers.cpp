#include "gaitpipe/nn/layers.hpp"

#include <Eigen/Core>
#include <cmath>

#include "gaitpipe/error.hpp"

namespace gaitpipe::nn {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

// Explicit loops: Eigen reductions over mapped memory peel to alignment, so
// their summation order would depend on where each buffer was allocated.
void add_column_sums(const double* rows, std::size_t m, std::size_t cols, double* out) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t c = 0; c < cols; ++c) out[c] += rows[i * cols + c];
}

void add_bias(double* rows, std::size_t m, std::size_t cols, const double* bias) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t c = 0; c < cols; ++c) rows[i * cols + c] += bias[c];
}

void require_same(const Shape& expected, const Shape& got, const char* layer) {
  if (!(expected == got))
    throw Error(ErrorCode::ShapeMismatch, std::string(layer) + ": gradient shape " + got.str() +
                                              " does not match forward output " + expected.str());
}

}  // namespace

// ---- Conv2d ----------------------------------------------------------------

Conv2d::Conv2d(std::size_t in_channels, std::size_t out_channels)
    : in_(in_channels),
      out_(out_channels),
      kernel_("kernel", kKernel * kKernel * in_channels * out_channels),
      bias_("bias", out_channels) {}

void Conv2d::check_input(const Shape& in) const {
  if (in.c != in_)
    throw Error(ErrorCode::ShapeMismatch,
                "conv2d expects " + std::to_string(in_) + " input channels, got shape " + in.str());
  if (in.h == 0 || in.w == 0 || in.n == 0) throw Error(ErrorCode::ShapeMismatch, "conv2d: empty input " + in.str());
}

Shape Conv2d::output_shape(const Shape& in) const {
  check_input(in);
  return {in.n, in.h, in.w, out_};
}

std::vector<double> Conv2d::im2col(const Tensor4& input) const {
  const Shape& s = input.shape();
  const std::size_t k = kKernel * kKernel * in_;
  std::vector<double> cols(s.n * s.h * s.w * k, 0.0);
  std::size_t row = 0;
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t h = 0; h < s.h; ++h)
      for (std::size_t w = 0; w < s.w; ++w, ++row) {
        double* dst = cols.data() + row * k;
        for (std::size_t kh = 0; kh < kKernel; ++kh) {
          if (h + kh >= s.h) continue;
          for (std::size_t kw = 0; kw < kKernel; ++kw) {
            if (w + kw >= s.w) continue;
            const double* src = input.data() + ((n * s.h + h + kh) * s.w + w + kw) * in_;
            std::copy_n(src, in_, dst + (kh * kKernel + kw) * in_);
          }
        }
      }
  return cols;
}

Tensor4 Conv2d::infer(const Tensor4& input) const {
  const Shape out_shape = output_shape(input.shape());
  const auto cols = im2col(input);
  const std::size_t m = out_shape.n * out_shape.h * out_shape.w;
  const std::size_t k = kKernel * kKernel * in_;
  Tensor4 out(out_shape);
  MatrixMap y(out.data(), idx(m), idx(out_));
  y.noalias() = ConstMatrixMap(cols.data(), idx(m), idx(k)) * ConstMatrixMap(kernel_.value.data(), idx(k), idx(out_));
  add_bias(out.data(), m, out_, bias_.value.data());
  return out;
}

Tensor4 Conv2d::forward(const Tensor4& input, Mode) {
  const Shape out_shape = output_shape(input.shape());
  cached_in_ = input.shape();
  cached_cols_ = im2col(input);
  const std::size_t m = out_shape.n * out_shape.h * out_shape.w;
  const std::size_t k = kKernel * kKernel * in_;
  Tensor4 out(out_shape);
  MatrixMap y(out.data(), idx(m), idx(out_));
  y.noalias() =
      ConstMatrixMap(cached_cols_.data(), idx(m), idx(k)) * ConstMatrixMap(kernel_.value.data(), idx(k), idx(out_));
  add_bias(out.data(), m, out_, bias_.value.data());
  return out;
}

Tensor4 Conv2d::backward(const Tensor4& grad_out) {
  const Shape& s = cached_in_;
  require_same({s.n, s.h, s.w, out_}, grad_out.shape(), "conv2d");
  const std::size_t m = s.n * s.h * s.w;
  const std::size_t k = kKernel * kKernel * in_;
  ConstMatrixMap g(grad_out.data(), idx(m), idx(out_));
  ConstMatrixMap cols(cached_cols_.data(), idx(m), idx(k));

  MatrixMap(kernel_.grad.data(), idx(k), idx(out_)).noalias() += cols.transpose() * g;
  add_column_sums(grad_out.data(), m, out_, bias_.grad.data());

  RowMatrix dcols = g * ConstMatrixMap(kernel_.value.data(), idx(k), idx(out_)).transpose();
  Tensor4 grad_in(s);
  std::size_t row = 0;
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t h = 0; h < s.h; ++h)
      for (std::size_t w = 0; w < s.w; ++w, ++row) {
        const double* src = dcols.data() + row * k;
        for (std::size_t kh = 0; kh < kKernel; ++kh) {
          if (h + kh >= s.h) continue;
          for (std::size_t kw = 0; kw < kKernel; ++kw) {
            if (w + kw >= s.w) continue;
            double* dst = &grad_in.at(n, h + kh, w + kw, 0);
            const double* part = src + (kh * kKernel + kw) * in_;
            for (std::size_t c = 0; c < in_; ++c) dst[c] += part[c];
          }
        }
      }
  return grad_in;
}

// ---- BatchNorm -------------------------------------------------------------

BatchNorm::BatchNorm(std::size_t channels)
    : channels_(channels),
      gamma_("gamma", channels),
      beta_("beta", channels),
      running_mean_(channels, 0.0),
      running_var_(channels, 1.0) {
  std::fill(gamma_.value.begin(), gamma_.value.end(), 1.0);
}

Tensor4 BatchNorm::infer(const Tensor4& input) const {
  if (input.shape().c != channels_)
    throw Error(ErrorCode::ShapeMismatch, "batchnorm expects " + std::to_string(channels_) + " channels");
  Tensor4 out(input.shape());
  const std::size_t m = input.shape().n * input.shape().h * input.shape().w;
  for (std::size_t c = 0; c < channels_; ++c) {
    const double inv = 1.0 / std::sqrt(running_var_[c] + kEpsilon);
    const double scale = gamma_.value[c] * inv;
    const double shift = beta_.value[c] - running_mean_[c] * scale;
    for (std::size_t i = 0; i < m; ++i) out.data()[i * channels_ + c] = input.data()[i * channels_ + c] * scale + shift;
  }
  return out;
}

Tensor4 BatchNorm::forward(const Tensor4& input, Mode mode) {
  const Shape& s = input.shape();
  if (s.c != channels_)
    throw Error(ErrorCode::ShapeMismatch, "batchnorm expects " + std::to_string(channels_) + " channels");
  cached_mode_ = mode;
  cached_shape_ = s;
  const std::size_t m = s.n * s.h * s.w;
  cached_inv_std_.assign(channels_, 0.0);
  if (mode == Mode::Infer) {
    for (std::size_t c = 0; c < channels_; ++c) cached_inv_std_[c] = 1.0 / std::sqrt(running_var_[c] + kEpsilon);
    cached_xhat_.resize(m * channels_);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t c = 0; c < channels_; ++c) {
        const std::size_t j = i * channels_ + c;
        cached_xhat_[j] = (input.data()[j] - running_mean_[c]) * cached_inv_std_[c];
      }
    return infer(input);
  }
  if (s.n < 2) throw Error(ErrorCode::BatchTooSmall, "batch normalization in training needs a batch of at least 2");

  std::vector<double> mean(channels_, 0.0), var(channels_, 0.0);
  const double* x = input.data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t c = 0; c < channels_; ++c) mean[c] += x[i * channels_ + c];
  for (double& v : mean) v /= static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t c = 0; c < channels_; ++c) {
      const double d = x[i * channels_ + c] - mean[c];
      var[c] += d * d;
    }
  for (double& v : var) v /= static_cast<double>(m);

  Tensor4 out(s);
  cached_xhat_.resize(m * channels_);
  for (std::size_t c = 0; c < channels_; ++c) cached_inv_std_[c] = 1.0 / std::sqrt(var[c] + kEpsilon);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t c = 0; c < channels_; ++c) {
      const std::size_t j = i * channels_ + c;
      cached_xhat_[j] = (x[j] - mean[c]) * cached_inv_std_[c];
      out.data()[j] = gamma_.value[c] * cached_xhat_[j] + beta_.value[c];
    }

  const double unbias = static_cast<double>(m) / static_cast<double>(m - 1);
  for (std::size_t c = 0; c < channels_; ++c) {
    running_mean_[c] = (1.0 - kMomentum) * running_mean_[c] + kMomentum * mean[c];
    running_var_[c] = (1.0 - kMomentum) * running_var_[c] + kMomentum * var[c] * unbias;
  }
  return out;
}

Tensor4 BatchNorm::backward(const Tensor4& grad_out) {
  require_same(cached_shape_, grad_out.shape(), "batchnorm");
  const std::size_t m = cached_shape_.n * cached_shape_.h * cached_shape_.w;
  const double* dy = grad_out.data();
  Tensor4 grad_in(cached_shape_);
  double* dx = grad_in.data();

  if (cached_mode_ == Mode::Infer) {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t c = 0; c < channels_; ++c) {
        const std::size_t j = i * channels_ + c;
        dx[j] = dy[j] * gamma_.value[c] * cached_inv_std_[c];
        beta_.grad[c] += dy[j];
        gamma_.grad[c] += dy[j] * cached_xhat_[j];
      }
    return grad_in;
  }

  std::vector<double> sum_dy(channels_, 0.0), sum_dy_xhat(channels_, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t c = 0; c < channels_; ++c) {
      const std::size_t j = i * channels_ + c;
      sum_dy[c] += dy[j];
      sum_dy_xhat[c] += dy[j] * cached_xhat_[j];
    }
  for (std::size_t c = 0; c < channels_; ++c) {
    beta_.grad[c] += sum_dy[c];
    gamma_.grad[c] += sum_dy_xhat[c];
  }
  const double md = static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t c = 0; c < channels_; ++c) {
      const std::size_t j = i * channels_ + c;
      dx[j] = gamma_.value[c] * cached_inv_std_[c] / md *
              (md * dy[j] - sum_dy[c] - cached_xhat_[j] * sum_dy_xhat[c]);
    }
  return grad_in;
}

// ---- Relu ------------------------------------------------------------------

Tensor4 Relu::infer(const Tensor4& input) const {
  Tensor4 out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) out.data()[i] = input.data()[i] > 0.0 ? input.data()[i] : 0.0;
  return out;
}

Tensor4 Relu::forward(const Tensor4& input, Mode) {
  cached_shape_ = input.shape();
  active_.resize(input.size());
  for (std::size_t i = 0; i < input.size(); ++i) active_[i] = input.data()[i] > 0.0 ? 1 : 0;
  return infer(input);
}

Tensor4 Relu::backward(const Tensor4& grad_out) {
  require_same(cached_shape_, grad_out.shape(), "relu");
  Tensor4 grad_in(cached_shape_);
  for (std::size_t i = 0; i < grad_out.size(); ++i) grad_in.data()[i] = active_[i] ? grad_out.data()[i] : 0.0;
  return grad_in;
}

// ---- MaxPool ---------------------------------------------------------------

Shape MaxPool::output_shape(const Shape& in) const {
  if (in.h < 2 || in.w < 2)
    throw Error(ErrorCode::InputTooSmall, "2x2 max pooling needs at least 2x2 input, got " + in.str());
  return {in.n, in.h - 1, in.w - 1, in.c};
}

Tensor4 MaxPool::run(const Tensor4& input, std::vector<std::size_t>* argmax) const {
  const Shape& s = input.shape();
  const Shape o = output_shape(s);
  Tensor4 out(o);
  if (argmax) argmax->assign(o.size(), 0);
  std::size_t j = 0;
  for (std::size_t n = 0; n < o.n; ++n)
    for (std::size_t h = 0; h < o.h; ++h)
      for (std::size_t w = 0; w < o.w; ++w)
        for (std::size_t c = 0; c < o.c; ++c, ++j) {
          std::size_t best = ((n * s.h + h) * s.w + w) * s.c + c;
          double best_value = input.data()[best];
          // Row-major window order; strict comparison keeps the first maximum.
          for (std::size_t dh = 0; dh < 2; ++dh)
            for (std::size_t dw = 0; dw < 2; ++dw) {
              const std::size_t i = ((n * s.h + h + dh) * s.w + w + dw) * s.c + c;
              if (input.data()[i] > best_value) {
                best_value = input.data()[i];
                best = i;
              }
            }
          out.data()[j] = best_value;
          if (argmax) (*argmax)[j] = best;
        }
  return out;
}

Tensor4 MaxPool::infer(const Tensor4& input) const { return run(input, nullptr); }

Tensor4 MaxPool::forward(const Tensor4& input, Mode) {
  cached_in_ = input.shape();
  return run(input, &argmax_);
}

Tensor4 MaxPool::backward(const Tensor4& grad_out) {
  require_same(output_shape(cached_in_), grad_out.shape(), "maxpool");
  Tensor4 grad_in(cached_in_);
  for (std::size_t j = 0; j < grad_out.size(); ++j) grad_in.data()[argmax_[j]] += grad_out.data()[j];
  return grad_in;
}

// ---- Dropout ---------------------------------------------------------------

Dropout::Dropout(double rate, std::uint64_t seed) : rate_(rate), rng_(seed) {
  if (!(rate >= 0.0 && rate < 1.0)) throw Error(ErrorCode::InvalidArgument, "dropout rate must be in [0, 1)");
}

Tensor4 Dropout::forward(const Tensor4& input, Mode mode) {
  scale_.assign(input.size(), 1.0);
  if (mode == Mode::Infer || rate_ == 0.0) return input;
  const double keep_scale = 1.0 / (1.0 - rate_);
  Tensor4 out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) {
    // 53 random bits -> uniform in [0, 1), independent of the standard library's distributions.
    const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    scale_[i] = u < rate_ ? 0.0 : keep_scale;
    out.data()[i] = input.data()[i] * scale_[i];
  }
  return out;
}

Tensor4 Dropout::backward(const Tensor4& grad_out) {
  if (grad_out.size() != scale_.size()) throw Error(ErrorCode::ShapeMismatch, "dropout: gradient size mismatch");
  Tensor4 grad_in(grad_out.shape());
  for (std::size_t i = 0; i < grad_out.size(); ++i) grad_in.data()[i] = grad_out.data()[i] * scale_[i];
  return grad_in;
}

// ---- Dense -----------------------------------------------------------------

Dense::Dense(std::size_t in_features, std::size_t out_features)
    : in_(in_features),
      out_(out_features),
      weight_("weight", in_features * out_features),
      bias_("bias", out_features) {}

Shape Dense::output_shape(const Shape& in) const {
  if (in.per_item() != in_)
    throw Error(ErrorCode::ShapeMismatch,
                "dense expects " + std::to_string(in_) + " features per item, got shape " + in.str());
  return {in.n, 1, 1, out_};
}

// Dense products are matrix-vector shaped for the single-output head, where
// Eigen would again vectorize by alignment; plain loops keep results bitwise
// reproducible.
Tensor4 Dense::infer(const Tensor4& input) const {
  const Shape o = output_shape(input.shape());
  Tensor4 out(o);
  for (std::size_t n = 0; n < o.n; ++n) {
    const double* x = input.data() + n * in_;
    for (std::size_t j = 0; j < out_; ++j) {
      double acc = bias_.value[j];
      for (std::size_t i = 0; i < in_; ++i) acc += x[i] * weight_.value[i * out_ + j];
      out.data()[n * out_ + j] = acc;
    }
  }
  return out;
}

Tensor4 Dense::forward(const Tensor4& input, Mode) {
  cached_input_ = input;
  return infer(input);
}

Tensor4 Dense::backward(const Tensor4& grad_out) {
  const std::size_t n = cached_input_.shape().n;
  require_same({n, 1, 1, out_}, grad_out.shape(), "dense");
  const double* g = grad_out.data();
  Tensor4 grad_in(cached_input_.shape());
  for (std::size_t b = 0; b < n; ++b) {
    const double* x = cached_input_.data() + b * in_;
    double* dx = grad_in.data() + b * in_;
    for (std::size_t i = 0; i < in_; ++i)
      for (std::size_t j = 0; j < out_; ++j) {
        const double gj = g[b * out_ + j];
        weight_.grad[i * out_ + j] += x[i] * gj;
        dx[i] += gj * weight_.value[i * out_ + j];
      }
  }
  add_column_sums(g, n, out_, bias_.grad.data());
  return grad_in;
}

}  // namespace gaitpipe::nn
