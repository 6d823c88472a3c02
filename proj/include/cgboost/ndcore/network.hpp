#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "cgboost/ndcore/tensor.hpp"

namespace cgb::nd {

class Layer;

// y = W x + b on a rank-1 input. weight is [out x in].
struct DenseLayer {
  Tensor weight;
  Tensor bias;
};

// Stride 1, zero "same" padding of (k-1)/2 per side. kernel is
// [out_channels x in_channels x k], input is [in_channels x length].
struct Conv1dLayer {
  Tensor kernel;
  Tensor bias;
};

struct ReluLayer {};
struct SigmoidLayer {};
struct FlattenLayer {};

// H(x) = F(x) + x, where F is the inner stack and must preserve shape.
struct ResidualBlock {
  std::vector<Layer> inner;
};

enum class LayerKind { dense, conv1d, relu, sigmoid, residual, flatten };

std::string_view layer_kind_name(LayerKind kind);

class Layer {
 public:
  using Impl = std::variant<DenseLayer, Conv1dLayer, ReluLayer, SigmoidLayer, ResidualBlock, FlattenLayer>;

  // Parameters start at zero; see seeded_init.
  static Layer dense(std::size_t in_features, std::size_t out_features);
  static Layer conv1d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel_width);
  static Layer relu();
  static Layer sigmoid();
  static Layer flatten();
  static Layer residual(std::vector<Layer> inner);

  LayerKind kind() const;
  Shape output_shape(const Shape& input) const;

  const Impl& impl() const noexcept { return impl_; }
  Impl& impl() noexcept { return impl_; }

  template <typename T>
  const T& as() const { return std::get<T>(impl_); }
  template <typename T>
  T& as() { return std::get<T>(impl_); }

 private:
  explicit Layer(Impl impl) : impl_(std::move(impl)) {}
  Impl impl_;
};

enum class ParamRole { weight, bias };

template <typename T>
struct BasicParamRef {
  T* tensor;
  ParamRole role;
  std::size_t fan_in;
  std::size_t fan_out;
};
using ParamRef = BasicParamRef<Tensor>;
using ConstParamRef = BasicParamRef<const Tensor>;

// An ordered layer stack with a declared input shape. Shapes are checked at
// construction, so forward never sees an incompatible layer sequence.
class Network {
 public:
  // Empty placeholder with no layers and an empty input shape.
  Network() = default;
  Network(Shape input_shape, std::vector<Layer> layers);

  const Shape& input_shape() const noexcept { return input_shape_; }
  const Shape& output_shape() const noexcept { return output_shape_; }
  const std::vector<Layer>& layers() const noexcept { return layers_; }
  std::vector<Layer>& mutable_layers() noexcept { return layers_; }

  // Depth-first, weight before bias, residual inner layers in place.
  std::vector<ParamRef> parameters();
  std::vector<ConstParamRef> parameters() const;

  std::size_t parameter_count() const;
  // Omega = sum of squared weights (biases excluded).
  double weight_norm_sq() const;

  friend bool operator==(const Network& a, const Network& b);

 private:
  Shape input_shape_;
  Shape output_shape_;
  std::vector<Layer> layers_;
};

bool operator==(const Layer& a, const Layer& b);

Tensor conv1d_forward(const Tensor& input, const Tensor& kernels, const Tensor& bias);
Tensor residual_block_forward(const Tensor& x, const Network& inner);

Tensor forward(const Network& net, const Tensor& x);

struct Gradients {
  std::vector<Tensor> params;  // aligned with Network::parameters()
  Tensor input;
};

std::vector<Tensor> zero_gradients(const Network& net);

// Exact reverse-mode gradients of <forward(x), upstream>.
Gradients backward(const Network& net, const Tensor& x, const Tensor& upstream);

// Adds parameter gradients into param_grads and returns the input gradient.
Tensor backward_accumulate(const Network& net, const Tensor& x, const Tensor& upstream,
                           std::vector<Tensor>& param_grads);

// One traced forward pass; upstream_of maps the output to the gradient that is
// then backpropagated into param_grads. Returns the output.
Tensor forward_backward(const Network& net, const Tensor& x, const std::function<Tensor(const Tensor&)>& upstream_of,
                        std::vector<Tensor>& param_grads);

// Smallest |pre-activation| seen by any ReLU on this input. Finite-difference
// checks use it to skip inputs that sit on a kink.
double min_abs_relu_input(const Network& net, const Tensor& x);

}  // namespace cgb::nd
