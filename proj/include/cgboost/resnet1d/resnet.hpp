#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cgboost/ndcore/network.hpp"
#include "cgboost/ndcore/sgd.hpp"

namespace cgb::resnet {

struct ResNetConfig {
  std::size_t input_channels = 1;  // d
  std::size_t window_len = 20;     // L
  std::size_t blocks = 2;
  std::size_t channels = 8;
  std::size_t kernel_width = 3;  // odd

  // Throws ConfigError on invalid dimensions.
  void validate() const;
  nd::Shape input_shape() const { return {input_channels, window_len}; }
};

// conv(d -> c) -> relu -> [residual(conv, relu, conv)] x blocks -> flatten -> dense(c*L -> 1).
// Weights are Xavier-uniform from the seed; the second conv of every residual
// block is zero, so each block starts as the identity.
nd::Network build_resnet(const ResNetConfig& cfg, std::uint64_t seed);

// A zero-initialized residual block for a network built with cfg.
nd::Layer zero_residual_block(const ResNetConfig& cfg);

struct RegressionSample {
  nd::Tensor x;
  double target = 0;
};

// Scalar network output.
double predict_scalar(const nd::Network& net, const nd::Tensor& x);

// mean_i (net(x_i) - target_i)^2.
double mean_squared_error(const nd::Network& net, std::span<const RegressionSample> samples);

// mean squared error + l2_lambda * sum ||W||^2.
double regression_objective(const nd::Network& net, std::span<const RegressionSample> samples, double l2_lambda);

struct FitResult {
  nd::Network network;
  double initial_loss = 0;  // objective of the starting network
  double final_loss = 0;    // objective of the returned network
  std::vector<double> epoch_loss;
};

// Mini-batch SGD on regression_objective. The returned network is the
// lowest-objective epoch snapshot among those whose data MSE does not exceed
// the starting network's (the start itself qualifies), so final_loss <=
// initial_loss and the fitted MSE never gets worse.
FitResult fit_regressor(nd::Network net, std::span<const RegressionSample> samples, const nd::SgdConfig& sgd);

}  // namespace cgb::resnet
