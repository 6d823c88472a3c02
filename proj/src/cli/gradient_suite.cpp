#include "cgboost/cli/gradient_suite.hpp"

#include <algorithm>
#include <chrono>

#include "cgboost/ndcore/rng.hpp"
#include "cgboost/ndcore/sgd.hpp"
#include "cgboost/resnet1d/resnet.hpp"
#include "cgboost/sae/sae.hpp"

namespace cgb::cli {
namespace {

nd::Tensor random_tensor(const nd::Shape& shape, nd::Rng& rng, double scale) {
  nd::Tensor t(shape);
  for (double& v : t.data()) v = rng.uniform(-scale, scale);
  return t;
}

void randomize_biases(nd::Network& net, nd::Rng& rng) {
  for (auto& p : net.parameters())
    if (p.role == nd::ParamRole::bias)
      for (double& v : p.tensor->data()) v = rng.uniform(-0.5, 0.5);
}

nd::Network network_for_kind(nd::LayerKind kind, nd::Rng& rng) {
  using nd::Layer;
  const std::size_t c = 1 + rng.below(3), len = 2 + rng.below(6), k = 1 + 2 * rng.below(2);
  switch (kind) {
    case nd::LayerKind::dense:
      return nd::Network({c * len}, {Layer::dense(c * len, 1 + rng.below(4))});
    case nd::LayerKind::conv1d:
      return nd::Network({c, len}, {Layer::conv1d(c, 1 + rng.below(3), k)});
    case nd::LayerKind::relu:
      return nd::Network({c, len}, {Layer::relu()});
    case nd::LayerKind::sigmoid:
      return nd::Network({c, len}, {Layer::sigmoid()});
    case nd::LayerKind::flatten:
      return nd::Network({c, len}, {Layer::flatten()});
    case nd::LayerKind::residual:
      return nd::Network({c, len}, {Layer::residual({Layer::conv1d(c, c, k), Layer::relu(), Layer::conv1d(c, c, k)})});
  }
  return nd::Network({1}, {});
}

GradientSuiteEntry check_layer_kind(nd::LayerKind kind, nd::Rng& rng, std::size_t cases,
                                    const nd::GradTolerance& tol) {
  GradientSuiteEntry entry{.name = std::string(nd::layer_kind_name(kind))};
  while (entry.cases < cases) {
    nd::Network net = network_for_kind(kind, rng);
    nd::seeded_init(net, rng.next_u64());
    randomize_biases(net, rng);
    const nd::Tensor x = random_tensor(net.input_shape(), rng, 2.0);
    if (nd::min_abs_relu_input(net, x) < 1e-3) continue;
    entry.stats.merge(nd::check_network_gradients(net, x, random_tensor(net.output_shape(), rng, 1.0), tol));
    ++entry.cases;
  }
  return entry;
}

GradientSuiteEntry check_sae_loss(sae::EncoderArch arch, nd::Rng& rng, std::size_t cases,
                                  const nd::GradTolerance& tol) {
  GradientSuiteEntry entry{.name = arch == sae::EncoderArch::dense ? "sae_loss/dense" : "sae_loss/residual_conv"};
  while (entry.cases < cases) {
    const std::size_t d = 2 + rng.below(5);
    const double rho = rng.uniform(0.02, 0.3), beta = rng.uniform(0.1, 2.0);
    sae::SaeModel m =
        sae::make_sae(d, {.hidden = 1 + rng.below(4), .encoder = arch, .conv_channels = 2}, rho, beta, rng.next_u64());
    randomize_biases(m.encoder.network, rng);
    randomize_biases(m.decoder, rng);
    std::vector<nd::Tensor> batch;
    bool kink = false;
    const std::size_t m_size = 2 + rng.below(4);
    for (std::size_t i = 0; i < m_size; ++i) {
      nd::Tensor x({d});
      for (double& v : x.data()) v = rng.uniform();
      const nd::Tensor in = arch == sae::EncoderArch::dense ? x : x.reshaped({1, d});
      kink |= nd::min_abs_relu_input(m.encoder.network, in) < 1e-3;
      batch.push_back(std::move(x));
    }
    if (kink) continue;
    const sae::SparseLossGradients g = sae::sparse_loss_gradients(m, batch);
    auto objective = [&] { return sae::sparse_loss(m, batch); };
    auto ep = m.encoder.network.parameters();
    for (std::size_t i = 0; i < ep.size(); ++i)
      nd::check_against_central_differences(ep[i].tensor->data(), g.encoder[i].data(), objective, tol, entry.stats);
    auto dp = m.decoder.parameters();
    for (std::size_t i = 0; i < dp.size(); ++i)
      nd::check_against_central_differences(dp[i].tensor->data(), g.decoder[i].data(), objective, tol, entry.stats);
    ++entry.cases;
  }
  return entry;
}

GradientSuiteEntry check_resnet(nd::Rng& rng, std::size_t cases, const nd::GradTolerance& tol) {
  GradientSuiteEntry entry{.name = "resnet"};
  while (entry.cases < cases) {
    const resnet::ResNetConfig cfg{.input_channels = 1 + rng.below(4),
                                   .window_len = 2 + rng.below(9),
                                   .blocks = rng.below(4),
                                   .channels = 1 + rng.below(5),
                                   .kernel_width = 1 + 2 * rng.below(3)};
    nd::Network net = resnet::build_resnet(cfg, rng.next_u64());
    for (auto& p : net.parameters())
      for (double& v : p.tensor->data()) v = rng.uniform(-0.6, 0.6);
    const nd::Tensor x = random_tensor(cfg.input_shape(), rng, 2.0);
    if (nd::min_abs_relu_input(net, x) < 1e-3) continue;
    entry.stats.merge(nd::check_network_gradients(net, x, random_tensor({1}, rng, 1.0), tol));
    ++entry.cases;
  }
  return entry;
}

}  // namespace

bool GradientSuiteResult::ok() const {
  return !entries.empty() && std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.stats.ok(); });
}

GradientSuiteResult run_gradient_suite(std::uint64_t seed, std::size_t cases, const nd::GradTolerance& tol) {
  const auto start = std::chrono::steady_clock::now();
  GradientSuiteResult out;
  nd::Rng rng(nd::mix_seed(seed, 31));
  for (nd::LayerKind kind : {nd::LayerKind::dense, nd::LayerKind::conv1d, nd::LayerKind::relu, nd::LayerKind::sigmoid,
                             nd::LayerKind::flatten, nd::LayerKind::residual}) {
    out.entries.push_back(check_layer_kind(kind, rng, cases, tol));
  }
  out.entries.push_back(check_sae_loss(sae::EncoderArch::dense, rng, cases, tol));
  out.entries.push_back(check_sae_loss(sae::EncoderArch::residual_conv, rng, cases, tol));
  out.entries.push_back(check_resnet(rng, cases, tol));
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace cgb::cli
