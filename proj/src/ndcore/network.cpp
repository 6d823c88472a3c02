#include "cgboost/ndcore/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <fmt/format.h>

#include "cgboost/error.hpp"

namespace cgb::nd {

std::string_view layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::dense: return "dense";
    case LayerKind::conv1d: return "conv1d";
    case LayerKind::relu: return "relu";
    case LayerKind::sigmoid: return "sigmoid";
    case LayerKind::residual: return "residual";
    case LayerKind::flatten: return "flatten";
  }
  return "unknown";
}

Layer Layer::dense(std::size_t in_features, std::size_t out_features) {
  return Layer(DenseLayer{Tensor({out_features, in_features}), Tensor({out_features})});
}

Layer Layer::conv1d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel_width) {
  if (kernel_width % 2 == 0) {
    throw ShapeError(fmt::format("conv1d kernel width must be odd, got {}", kernel_width));
  }
  return Layer(Conv1dLayer{Tensor({out_channels, in_channels, kernel_width}), Tensor({out_channels})});
}

Layer Layer::relu() { return Layer(ReluLayer{}); }
Layer Layer::sigmoid() { return Layer(SigmoidLayer{}); }
Layer Layer::flatten() { return Layer(FlattenLayer{}); }
Layer Layer::residual(std::vector<Layer> inner) { return Layer(ResidualBlock{std::move(inner)}); }

LayerKind Layer::kind() const { return static_cast<LayerKind>(impl_.index()); }

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Shape stack_output_shape(const std::vector<Layer>& layers, Shape shape) {
  for (const Layer& layer : layers) shape = layer.output_shape(shape);
  return shape;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

Shape Layer::output_shape(const Shape& input) const {
  return std::visit(
      Overloaded{
          [&](const DenseLayer& d) -> Shape {
            if (input.size() != 1) {
              throw ShapeError(fmt::format("dense layer expects a rank-1 input, got {}", shape_string(input)));
            }
            if (input[0] != d.weight.dim(1)) {
              throw ShapeError(fmt::format("dense layer input features: expected {}, got {}",
                                           d.weight.dim(1), input[0]));
            }
            return Shape{d.weight.dim(0)};
          },
          [&](const Conv1dLayer& c) -> Shape {
            if (input.size() != 2) {
              throw ShapeError(
                  fmt::format("conv1d expects a [channels x length] input, got {}", shape_string(input)));
            }
            if (input[0] != c.kernel.dim(1)) {
              throw ShapeError(fmt::format("conv1d input channels: expected {}, got {}", c.kernel.dim(1),
                                           input[0]));
            }
            return Shape{c.kernel.dim(0), input[1]};
          },
          [&](const ReluLayer&) { return input; },
          [&](const SigmoidLayer&) { return input; },
          [&](const FlattenLayer&) { return Shape{shape_size(input)}; },
          [&](const ResidualBlock& r) {
            Shape out = stack_output_shape(r.inner, input);
            if (out != input) {
              throw ShapeError(fmt::format("residual block inner stack maps {} to {}; it must preserve shape",
                                           shape_string(input), shape_string(out)));
            }
            return out;
          },
      },
      impl_);
}

bool operator==(const Layer& a, const Layer& b) {
  if (a.kind() != b.kind()) return false;
  return std::visit(
      Overloaded{
          [&](const DenseLayer& d) {
            const auto& o = b.as<DenseLayer>();
            return d.weight == o.weight && d.bias == o.bias;
          },
          [&](const Conv1dLayer& c) {
            const auto& o = b.as<Conv1dLayer>();
            return c.kernel == o.kernel && c.bias == o.bias;
          },
          [&](const ResidualBlock& r) { return r.inner == b.as<ResidualBlock>().inner; },
          [](const auto&) { return true; },
      },
      a.impl());
}

// ---------------------------------------------------------------------------
// Network

Network::Network(Shape input_shape, std::vector<Layer> layers)
    : input_shape_(std::move(input_shape)), layers_(std::move(layers)) {
  if (input_shape_.empty()) throw ShapeError("network input shape must be non-empty");
  for (std::size_t d : input_shape_) {
    if (d == 0) throw ShapeError(fmt::format("network input shape {} has a zero dimension", shape_string(input_shape_)));
  }
  output_shape_ = stack_output_shape(layers_, input_shape_);
}

namespace {

template <typename Ref, typename Layers>
void collect_params(Layers& layers, std::vector<Ref>& out) {
  for (auto& layer : layers) {
    auto& impl = layer.impl();
    if (auto* d = std::get_if<DenseLayer>(&impl)) {
      out.push_back({&d->weight, ParamRole::weight, d->weight.dim(1), d->weight.dim(0)});
      out.push_back({&d->bias, ParamRole::bias, d->weight.dim(1), d->weight.dim(0)});
    } else if (auto* c = std::get_if<Conv1dLayer>(&impl)) {
      const std::size_t k = c->kernel.dim(2);
      out.push_back({&c->kernel, ParamRole::weight, c->kernel.dim(1) * k, c->kernel.dim(0) * k});
      out.push_back({&c->bias, ParamRole::bias, c->kernel.dim(1) * k, c->kernel.dim(0) * k});
    } else if (auto* r = std::get_if<ResidualBlock>(&impl)) {
      collect_params<Ref>(r->inner, out);
    }
  }
}

std::size_t param_tensor_count(const Layer& layer) {
  switch (layer.kind()) {
    case LayerKind::dense:
    case LayerKind::conv1d:
      return 2;
    case LayerKind::residual: {
      std::size_t n = 0;
      for (const Layer& l : layer.as<ResidualBlock>().inner) n += param_tensor_count(l);
      return n;
    }
    default:
      return 0;
  }
}

}  // namespace

std::vector<ParamRef> Network::parameters() {
  std::vector<ParamRef> out;
  collect_params<ParamRef>(layers_, out);
  return out;
}

std::vector<ConstParamRef> Network::parameters() const {
  std::vector<ConstParamRef> out;
  collect_params<ConstParamRef>(layers_, out);
  return out;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p.tensor->size();
  return n;
}

double Network::weight_norm_sq() const {
  double s = 0.0;
  for (const auto& p : parameters()) {
    if (p.role == ParamRole::weight) s += p.tensor->squared_norm();
  }
  return s;
}

bool operator==(const Network& a, const Network& b) {
  return a.input_shape_ == b.input_shape_ && a.layers_ == b.layers_;
}

// ---------------------------------------------------------------------------
// Forward

Tensor conv1d_forward(const Tensor& input, const Tensor& kernels, const Tensor& bias) {
  if (input.rank() != 2) {
    throw ShapeError(fmt::format("conv1d input must be [channels x length], got {}", shape_string(input.shape())));
  }
  if (kernels.rank() != 3) {
    throw ShapeError(fmt::format("conv1d kernels must be [out x in x k], got {}", shape_string(kernels.shape())));
  }
  const std::size_t cout = kernels.dim(0), cin = kernels.dim(1), k = kernels.dim(2);
  const std::size_t len = input.dim(1);
  if (input.dim(0) != cin) {
    throw ShapeError(fmt::format("conv1d in_channels: kernels expect {}, input has {}", cin, input.dim(0)));
  }
  if (bias.rank() != 1 || bias.dim(0) != cout) {
    throw ShapeError(fmt::format("conv1d bias must be [{}], got {}", cout, shape_string(bias.shape())));
  }
  if (k % 2 == 0) throw ShapeError(fmt::format("conv1d kernel width must be odd, got {}", k));

  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(k / 2);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(len);
  Tensor out({cout, len});
  const double* x = input.data().data();
  const double* w = kernels.data().data();
  double* y = out.data().data();
  for (std::size_t o = 0; o < cout; ++o) {
    double* yo = y + o * len;
    for (std::size_t t = 0; t < len; ++t) yo[t] = bias[o];
    for (std::size_t c = 0; c < cin; ++c) {
      const double* xc = x + c * len;
      const double* woc = w + (o * cin + c) * k;
      for (std::size_t j = 0; j < k; ++j) {
        const double wj = woc[j];
        const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(j) - pad;
        const std::ptrdiff_t t0 = std::max<std::ptrdiff_t>(0, -shift);
        const std::ptrdiff_t t1 = std::min<std::ptrdiff_t>(n, n - shift);
        for (std::ptrdiff_t t = t0; t < t1; ++t) yo[t] += wj * xc[t + shift];
      }
    }
  }
  return out;
}

namespace {

Tensor dense_forward(const DenseLayer& d, const Tensor& x) {
  const std::size_t out_n = d.weight.dim(0), in_n = d.weight.dim(1);
  Tensor y({out_n});
  const double* w = d.weight.data().data();
  for (std::size_t o = 0; o < out_n; ++o) {
    double acc = d.bias[o];
    const double* wo = w + o * in_n;
    for (std::size_t i = 0; i < in_n; ++i) acc += wo[i] * x[i];
    y[o] = acc;
  }
  return y;
}

Tensor stack_forward(const std::vector<Layer>& layers, Tensor x);

Tensor layer_forward(const Layer& layer, const Tensor& x) {
  return std::visit(
      Overloaded{
          [&](const DenseLayer& d) { return dense_forward(d, x); },
          [&](const Conv1dLayer& c) { return conv1d_forward(x, c.kernel, c.bias); },
          [&](const ReluLayer&) {
            Tensor y = x;
            for (double& v : y.data()) v = v > 0.0 ? v : 0.0;
            return y;
          },
          [&](const SigmoidLayer&) {
            Tensor y = x;
            for (double& v : y.data()) v = sigmoid(v);
            return y;
          },
          [&](const FlattenLayer&) { return x.reshaped(Shape{x.size()}); },
          [&](const ResidualBlock& r) {
            Tensor y = stack_forward(r.inner, x);
            y += x;
            return y;
          },
      },
      layer.impl());
}

Tensor stack_forward(const std::vector<Layer>& layers, Tensor x) {
  for (const Layer& layer : layers) x = layer_forward(layer, x);
  return x;
}

void require_input_shape(const Network& net, const Tensor& x) {
  if (x.shape() != net.input_shape()) {
    throw ShapeError(fmt::format("network input: expected {}, got {}", shape_string(net.input_shape()),
                                 shape_string(x.shape())));
  }
}

}  // namespace

Tensor residual_block_forward(const Tensor& x, const Network& inner) {
  require_input_shape(inner, x);
  if (inner.output_shape() != inner.input_shape()) {
    throw ShapeError(fmt::format("residual inner network maps {} to {}; it must preserve shape",
                                 shape_string(inner.input_shape()), shape_string(inner.output_shape())));
  }
  Tensor y = stack_forward(inner.layers(), x);
  y += x;
  return y;
}

Tensor forward(const Network& net, const Tensor& x) {
  require_input_shape(net, x);
  return stack_forward(net.layers(), x);
}

// ---------------------------------------------------------------------------
// Backward

namespace {

// Per-layer inputs from the forward pass; residual blocks nest their own trace.
struct Trace {
  std::vector<Tensor> inputs;
  std::vector<Trace> children;
};

Tensor traced_forward(const std::vector<Layer>& layers, Tensor x, Trace& trace) {
  trace.inputs.clear();
  trace.children.assign(layers.size(), Trace{});
  trace.inputs.reserve(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Layer& layer = layers[i];
    trace.inputs.push_back(x);
    if (layer.kind() == LayerKind::residual) {
      Tensor y = traced_forward(layer.as<ResidualBlock>().inner, x, trace.children[i]);
      y += x;
      x = std::move(y);
    } else {
      x = layer_forward(layer, x);
    }
  }
  return x;
}

void dense_backward(const DenseLayer& d, const Tensor& x, const Tensor& g, Tensor& dw, Tensor& db, Tensor& dx) {
  const std::size_t out_n = d.weight.dim(0), in_n = d.weight.dim(1);
  const double* w = d.weight.data().data();
  double* dwp = dw.data().data();
  dx = Tensor({in_n});
  for (std::size_t o = 0; o < out_n; ++o) {
    const double go = g[o];
    db[o] += go;
    const double* wo = w + o * in_n;
    double* dwo = dwp + o * in_n;
    for (std::size_t i = 0; i < in_n; ++i) {
      dwo[i] += go * x[i];
      dx[i] += wo[i] * go;
    }
  }
}

void conv1d_backward(const Conv1dLayer& c, const Tensor& x, const Tensor& g, Tensor& dk, Tensor& db, Tensor& dx) {
  const std::size_t cout = c.kernel.dim(0), cin = c.kernel.dim(1), k = c.kernel.dim(2);
  const std::size_t len = x.dim(1);
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(k / 2);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(len);
  dx = Tensor({cin, len});
  const double* xp = x.data().data();
  const double* gp = g.data().data();
  const double* w = c.kernel.data().data();
  double* dkp = dk.data().data();
  double* dxp = dx.data().data();
  for (std::size_t o = 0; o < cout; ++o) {
    const double* go = gp + o * len;
    double bsum = 0.0;
    for (std::size_t t = 0; t < len; ++t) bsum += go[t];
    db[o] += bsum;
    for (std::size_t ci = 0; ci < cin; ++ci) {
      const double* xc = xp + ci * len;
      double* dxc = dxp + ci * len;
      const double* woc = w + (o * cin + ci) * k;
      double* dkoc = dkp + (o * cin + ci) * k;
      for (std::size_t j = 0; j < k; ++j) {
        const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(j) - pad;
        const std::ptrdiff_t t0 = std::max<std::ptrdiff_t>(0, -shift);
        const std::ptrdiff_t t1 = std::min<std::ptrdiff_t>(n, n - shift);
        const double wj = woc[j];
        double acc = 0.0;
        for (std::ptrdiff_t t = t0; t < t1; ++t) {
          acc += go[t] * xc[t + shift];
          dxc[t + shift] += wj * go[t];
        }
        dkoc[j] += acc;
      }
    }
  }
}

Tensor stack_backward(const std::vector<Layer>& layers, const Trace& trace, Tensor g, std::span<Tensor> grads) {
  std::vector<std::size_t> offsets(layers.size() + 1, 0);
  for (std::size_t i = 0; i < layers.size(); ++i) offsets[i + 1] = offsets[i] + param_tensor_count(layers[i]);

  for (std::size_t idx = layers.size(); idx-- > 0;) {
    const Layer& layer = layers[idx];
    const Tensor& x = trace.inputs[idx];
    std::span<Tensor> slot = grads.subspan(offsets[idx], offsets[idx + 1] - offsets[idx]);
    Tensor dx;
    switch (layer.kind()) {
      case LayerKind::dense:
        dense_backward(layer.as<DenseLayer>(), x, g, slot[0], slot[1], dx);
        break;
      case LayerKind::conv1d:
        conv1d_backward(layer.as<Conv1dLayer>(), x, g, slot[0], slot[1], dx);
        break;
      case LayerKind::relu:
        dx = std::move(g);
        for (std::size_t i = 0; i < dx.size(); ++i) {
          if (!(x[i] > 0.0)) dx[i] = 0.0;
        }
        break;
      case LayerKind::sigmoid:
        dx = std::move(g);
        for (std::size_t i = 0; i < dx.size(); ++i) {
          const double s = sigmoid(x[i]);
          dx[i] *= s * (1.0 - s);
        }
        break;
      case LayerKind::flatten:
        dx = g.reshaped(x.shape());
        break;
      case LayerKind::residual:
        dx = stack_backward(layer.as<ResidualBlock>().inner, trace.children[idx], g, slot);
        dx += g;
        break;
    }
    g = std::move(dx);
  }
  return g;
}

}  // namespace

std::vector<Tensor> zero_gradients(const Network& net) {
  std::vector<Tensor> grads;
  for (const auto& p : net.parameters()) grads.emplace_back(p.tensor->shape());
  return grads;
}

namespace {

void require_grad_layout(const Network& net, const std::vector<Tensor>& param_grads) {
  const auto params = net.parameters();
  if (param_grads.size() != params.size()) {
    throw ShapeError(fmt::format("gradient list has {} tensors, network has {}", param_grads.size(), params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    require_same_shape(param_grads[i], *params[i].tensor, "parameter gradient");
  }
}

void require_upstream_shape(const Network& net, const Tensor& upstream) {
  if (upstream.shape() != net.output_shape()) {
    throw ShapeError(fmt::format("upstream gradient: expected {}, got {}", shape_string(net.output_shape()),
                                 shape_string(upstream.shape())));
  }
}

}  // namespace

Tensor backward_accumulate(const Network& net, const Tensor& x, const Tensor& upstream,
                           std::vector<Tensor>& param_grads) {
  require_input_shape(net, x);
  require_upstream_shape(net, upstream);
  require_grad_layout(net, param_grads);
  Trace trace;
  traced_forward(net.layers(), x, trace);
  return stack_backward(net.layers(), trace, upstream, param_grads);
}

Tensor forward_backward(const Network& net, const Tensor& x, const std::function<Tensor(const Tensor&)>& upstream_of,
                        std::vector<Tensor>& param_grads) {
  require_input_shape(net, x);
  require_grad_layout(net, param_grads);
  Trace trace;
  Tensor out = traced_forward(net.layers(), x, trace);
  const Tensor upstream = upstream_of(out);
  require_upstream_shape(net, upstream);
  stack_backward(net.layers(), trace, upstream, param_grads);
  return out;
}

Gradients backward(const Network& net, const Tensor& x, const Tensor& upstream) {
  Gradients out;
  out.params = zero_gradients(net);
  out.input = backward_accumulate(net, x, upstream, out.params);
  return out;
}

namespace {

double min_relu_in_stack(const std::vector<Layer>& layers, Tensor x) {
  double best = std::numeric_limits<double>::infinity();
  for (const Layer& layer : layers) {
    if (layer.kind() == LayerKind::relu) {
      for (double v : x.data()) best = std::min(best, std::abs(v));
    } else if (layer.kind() == LayerKind::residual) {
      best = std::min(best, min_relu_in_stack(layer.as<ResidualBlock>().inner, x));
    }
    x = layer_forward(layer, x);
  }
  return best;
}

}  // namespace

double min_abs_relu_input(const Network& net, const Tensor& x) {
  require_input_shape(net, x);
  return min_relu_in_stack(net.layers(), x);
}

}  // namespace cgb::nd
