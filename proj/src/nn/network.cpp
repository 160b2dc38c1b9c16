#include "gaitpipe/nn/network.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "gaitpipe/error.hpp"

namespace gaitpipe::nn {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

std::string shape_hwc(const Shape& s) {
  return std::to_string(s.h) + "x" + std::to_string(s.w) + "x" + std::to_string(s.c);
}

}  // namespace

std::string layer_name(const Layer& layer) {
  return std::visit(Overloaded{
                        [](const Conv2d& l) {
                          return "conv2d(" + std::to_string(l.in_channels()) + "->" +
                                 std::to_string(l.out_channels()) + ",k=2x2,s=1,pad=same:bottom-right)";
                        },
                        [](const BatchNorm& l) { return "batchnorm(" + std::to_string(l.channels()) + ")"; },
                        [](const Relu&) { return std::string("relu"); },
                        [](const MaxPool&) { return std::string("maxpool(2x2,s=1,valid)"); },
                        [](const Dropout& l) {
                          std::ostringstream r;
                          r << "dropout(" << l.rate() << ")";
                          return r.str();
                        },
                        [](const Dense& l) {
                          return "dense(" + std::to_string(l.in_features()) + "->" +
                                 std::to_string(l.out_features()) + ")";
                        },
                    },
                    layer);
}

Network::Network(Shape input, std::vector<Layer> layers) : input_(input), layers_(std::move(layers)) {
  input_.n = 1;
  shape_chain();
}

std::vector<Shape> Network::shape_chain() const {
  std::vector<Shape> chain;
  Shape s = input_;
  for (const auto& layer : layers_) {
    s = std::visit([&](const auto& l) { return l.output_shape(s); }, layer);
    chain.push_back(s);
  }
  return chain;
}

std::string Network::fingerprint() const {
  std::string out = "input=" + shape_hwc(input_);
  const auto chain = shape_chain();
  for (std::size_t i = 0; i < layers_.size(); ++i) out += "|" + layer_name(layers_[i]) + "->" + shape_hwc(chain[i]);
  return out;
}

Tensor4 Network::forward(const Tensor4& input, Mode mode) {
  Tensor4 x = input;
  for (auto& layer : layers_) x = std::visit([&](auto& l) { return l.forward(x, mode); }, layer);
  return x;
}

Tensor4 Network::infer(const Tensor4& input) const {
  Tensor4 x = input;
  for (const auto& layer : layers_) x = std::visit([&](const auto& l) { return l.infer(x); }, layer);
  return x;
}

Tensor4 Network::backward(const Tensor4& grad_out) {
  Tensor4 g = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
    g = std::visit([&](auto& l) { return l.backward(g); }, *it);
  return g;
}

std::vector<Param*> Network::params() {
  std::vector<Param*> out;
  for (auto& layer : layers_) {
    std::visit(Overloaded{
                   [&](Conv2d& l) {
                     out.push_back(&l.kernel());
                     out.push_back(&l.bias());
                   },
                   [&](BatchNorm& l) {
                     out.push_back(&l.gamma());
                     out.push_back(&l.beta());
                   },
                   [&](Dense& l) {
                     out.push_back(&l.weight());
                     out.push_back(&l.bias());
                   },
                   [](auto&) {},
               },
               layer);
  }
  return out;
}

std::vector<const Param*> Network::params() const {
  auto mutable_params = const_cast<Network*>(this)->params();
  return {mutable_params.begin(), mutable_params.end()};
}

void Network::zero_grad() {
  for (auto* p : params()) p->zero_grad();
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : params()) n += p->value.size();
  return n;
}

void Network::reseed_dropout(std::uint64_t seed) {
  for (auto& layer : layers_)
    if (auto* d = std::get_if<Dropout>(&layer)) d->reseed(seed);
}

Network make_speed_network(std::uint64_t seed, double dropout_rate) {
  constexpr std::size_t kFilters[] = {16, 32, 48, 64};
  const Shape input{1, 45, 4, 1};
  std::vector<Layer> layers;
  std::size_t in_channels = 1;
  for (std::size_t g = 0; g < 4; ++g) {
    layers.emplace_back(Conv2d(in_channels, kFilters[g]));
    layers.emplace_back(BatchNorm(kFilters[g]));
    layers.emplace_back(Relu{});
    if (g < 3) layers.emplace_back(MaxPool{});
    in_channels = kFilters[g];
  }
  layers.emplace_back(Dropout(dropout_rate, seed));
  layers.emplace_back(Dense(42 * 1 * 64, 1));
  Network net(input, std::move(layers));

  // Group outputs after pooling, then the last conv group and the head.
  const auto chain = net.shape_chain();
  const Shape expected[] = {{1, 44, 3, 16}, {1, 43, 2, 32}, {1, 42, 1, 48}, {1, 42, 1, 64}, {1, 1, 1, 1}};
  const std::size_t at[] = {3, 7, 11, 14, chain.size() - 1};
  for (std::size_t i = 0; i < 5; ++i)
    if (!(chain[at[i]] == expected[i]))
      throw Error(ErrorCode::ShapeMismatch, "unexpected shape " + chain[at[i]].str() + " at layer " +
                                                std::to_string(at[i]) + ", expected " + expected[i].str());

  std::mt19937_64 rng(seed);
  for (auto& layer : net.layers()) {
    auto he_init = [&rng](Param& w, std::size_t fan_in) {
      std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
      for (double& v : w.value) v = dist(rng);
    };
    if (auto* c = std::get_if<Conv2d>(&layer)) he_init(c->kernel(), 4 * c->in_channels());
    if (auto* d = std::get_if<Dense>(&layer)) he_init(d->weight(), d->in_features());
  }
  return net;
}

std::vector<double> predict(const Network& network, const Tensor4& inputs) {
  std::vector<double> out;
  out.reserve(inputs.shape().n);
  const std::size_t per = inputs.shape().per_item();
  Shape one = inputs.shape();
  one.n = 1;
  for (std::size_t i = 0; i < inputs.shape().n; ++i) {
    Tensor4 item(one, std::vector<double>(inputs.data() + i * per, inputs.data() + (i + 1) * per));
    const auto y = network.infer(item);
    if (y.size() != 1) throw Error(ErrorCode::ShapeMismatch, "network output is not a scalar per item");
    out.push_back(y.data()[0]);
  }
  return out;
}

}  // namespace gaitpipe::nn
