#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cgboost/ndcore/network.hpp"

namespace cgb::nd {

struct SgdConfig {
  double learning_rate = 0.01;
  double l2_lambda = 0.0;  // coefficient of sum ||W_l||^2
  std::size_t batch_size = 32;
  std::size_t epochs = 20;
  std::uint64_t seed = 0;

  // Throws ConfigError on out-of-range fields.
  void validate() const;
};

// p <- p - lr * (grad + 2 * l2_lambda * p) for weights; biases are not decayed.
void sgd_step(Network& net, const std::vector<Tensor>& grads, const SgdConfig& cfg);

// Weights ~ U(-s, s), s = sqrt(6 / (fan_in + fan_out)); biases zero.
void seeded_init(Network& net, std::uint64_t seed);

}  // namespace cgb::nd
