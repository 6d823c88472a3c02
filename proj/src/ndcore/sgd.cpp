#include "cgboost/ndcore/sgd.hpp"

#include <cmath>

#include <fmt/format.h>

#include "cgboost/error.hpp"
#include "cgboost/ndcore/rng.hpp"

namespace cgb::nd {

void SgdConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError(fmt::format("sgd learning_rate must be finite and >= 0, got {}", learning_rate));
  }
  if (!(l2_lambda >= 0.0) || !std::isfinite(l2_lambda)) {
    throw ConfigError(fmt::format("sgd l2_lambda must be finite and >= 0, got {}", l2_lambda));
  }
  if (batch_size == 0) throw ConfigError("sgd batch_size must be positive");
  if (epochs == 0) throw ConfigError("sgd epochs must be positive");
}

void sgd_step(Network& net, const std::vector<Tensor>& grads, const SgdConfig& cfg) {
  auto params = net.parameters();
  if (grads.size() != params.size()) {
    throw ShapeError(fmt::format("sgd_step: {} gradients for {} parameters", grads.size(), params.size()));
  }
  const double lr = cfg.learning_rate;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i].tensor;
    require_same_shape(p, grads[i], "sgd_step gradient");
    const double decay = params[i].role == ParamRole::weight ? 2.0 * cfg.l2_lambda : 0.0;
    auto pv = p.data();
    auto gv = grads[i].data();
    for (std::size_t j = 0; j < pv.size(); ++j) pv[j] -= lr * (gv[j] + decay * pv[j]);
  }
}

void seeded_init(Network& net, std::uint64_t seed) {
  Rng rng(seed);
  for (auto& p : net.parameters()) {
    if (p.role == ParamRole::bias) {
      p.tensor->fill(0.0);
      continue;
    }
    const double s = std::sqrt(6.0 / static_cast<double>(p.fan_in + p.fan_out));
    for (double& v : p.tensor->data()) v = rng.uniform(-s, s);
  }
}

}  // namespace cgb::nd
