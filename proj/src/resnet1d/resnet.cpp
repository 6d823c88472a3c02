#include "cgboost/resnet1d/resnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "cgboost/error.hpp"
#include "cgboost/ndcore/rng.hpp"

namespace cgb::resnet {

void ResNetConfig::validate() const {
  if (input_channels == 0) throw ConfigError("resnet input_channels must be positive");
  if (window_len == 0) throw ConfigError("resnet window_len must be positive");
  if (channels == 0) throw ConfigError("resnet channels must be positive");
  if (kernel_width == 0 || kernel_width % 2 == 0) {
    throw ConfigError(fmt::format("resnet kernel_width must be odd, got {}", kernel_width));
  }
}

nd::Layer zero_residual_block(const ResNetConfig& cfg) {
  return nd::Layer::residual({nd::Layer::conv1d(cfg.channels, cfg.channels, cfg.kernel_width), nd::Layer::relu(),
                              nd::Layer::conv1d(cfg.channels, cfg.channels, cfg.kernel_width)});
}

nd::Network build_resnet(const ResNetConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::vector<nd::Layer> layers;
  layers.push_back(nd::Layer::conv1d(cfg.input_channels, cfg.channels, cfg.kernel_width));
  layers.push_back(nd::Layer::relu());
  for (std::size_t b = 0; b < cfg.blocks; ++b) layers.push_back(zero_residual_block(cfg));
  layers.push_back(nd::Layer::flatten());
  layers.push_back(nd::Layer::dense(cfg.channels * cfg.window_len, 1));
  nd::Network net(cfg.input_shape(), std::move(layers));
  nd::seeded_init(net, seed);
  for (auto& layer : net.mutable_layers()) {
    if (layer.kind() != nd::LayerKind::residual) continue;
    auto& inner = layer.as<nd::ResidualBlock>().inner;
    inner.back().as<nd::Conv1dLayer>().kernel.fill(0.0);
  }
  return net;
}

double predict_scalar(const nd::Network& net, const nd::Tensor& x) {
  const nd::Tensor y = nd::forward(net, x);
  if (y.size() != 1) throw ShapeError(fmt::format("regressor output has shape {}", nd::shape_string(y.shape())));
  return y[0];
}

double mean_squared_error(const nd::Network& net, std::span<const RegressionSample> samples) {
  if (samples.empty()) throw UsageError("mean_squared_error needs at least one sample");
  double se = 0;
  for (const auto& s : samples) {
    const double e = predict_scalar(net, s.x) - s.target;
    se += e * e;
  }
  return se / static_cast<double>(samples.size());
}

double regression_objective(const nd::Network& net, std::span<const RegressionSample> samples, double l2_lambda) {
  return mean_squared_error(net, samples) + l2_lambda * net.weight_norm_sq();
}

FitResult fit_regressor(nd::Network net, std::span<const RegressionSample> samples, const nd::SgdConfig& sgd) {
  if (samples.empty()) throw UsageError("fit_regressor needs at least one sample");
  sgd.validate();
  for (const auto& s : samples) {
    if (s.x.shape() != net.input_shape()) {
      throw ShapeError(fmt::format("regression sample shape {} does not match network input {}",
                                   nd::shape_string(s.x.shape()), nd::shape_string(net.input_shape())));
    }
    if (!s.x.all_finite() || !std::isfinite(s.target)) throw DataError("regression samples must be finite");
  }
  if (net.output_shape() != nd::Shape{1}) throw ShapeError("fit_regressor needs a scalar-output network");

  const double initial_mse = mean_squared_error(net, samples);
  const double initial = initial_mse + sgd.l2_lambda * net.weight_norm_sq();
  if (!std::isfinite(initial)) throw TrainingError("regressor initial loss is not finite");
  FitResult result{.network = net, .initial_loss = initial, .final_loss = initial, .epoch_loss = {}};

  nd::Rng rng(nd::mix_seed(sgd.seed, 4));
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<nd::Tensor> grads = nd::zero_gradients(net);
  nd::Tensor upstream({1});
  for (std::size_t epoch = 0; epoch < sgd.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += sgd.batch_size) {
      const std::size_t end = std::min(order.size(), start + sgd.batch_size);
      const double scale = 2.0 / static_cast<double>(end - start);
      for (auto& g : grads) g.fill(0.0);
      for (std::size_t i = start; i < end; ++i) {
        const RegressionSample& s = samples[order[i]];
        nd::forward_backward(
            net, s.x,
            [&](const nd::Tensor& out) {
              const double e = out[0] - s.target;
              if (!std::isfinite(e)) throw TrainingError(fmt::format("regressor loss diverged in epoch {}", epoch + 1));
              upstream[0] = scale * e;
              return upstream;
            },
            grads);
      }
      nd::sgd_step(net, grads, sgd);
    }
    const double mse = mean_squared_error(net, samples);
    const double loss = mse + sgd.l2_lambda * net.weight_norm_sq();
    if (!std::isfinite(loss)) throw TrainingError(fmt::format("regressor loss diverged in epoch {}", epoch + 1));
    result.epoch_loss.push_back(loss);
    if (loss < result.final_loss && mse <= initial_mse) {
      result.final_loss = loss;
      result.network = net;
    }
  }
  return result;
}

}  // namespace cgb::resnet
