#include "cgboost/sae/sae.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "cgboost/error.hpp"
#include "cgboost/ndcore/rng.hpp"

namespace cgb::sae {

namespace {

nd::Tensor as_encoder_input(const SaeEncoder& enc, const nd::Tensor& x) {
  if (x.rank() != 1 || x.size() != enc.input_dim) {
    throw ShapeError(fmt::format("sae input: expected [{}], got {}", enc.input_dim, nd::shape_string(x.shape())));
  }
  return enc.network.input_shape().size() == 1 ? x : x.reshaped(enc.network.input_shape());
}

void require_batch(std::span<const nd::Tensor> batch) {
  if (batch.empty()) throw UsageError("sae batch must be non-empty");
}

void check_rho(double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw DomainError(fmt::format("sparsity target rho must lie in (0, 1), got {}", rho));
}

double clamp_rho_hat(double v) { return std::clamp(v, kRhoHatClamp, 1.0 - kRhoHatClamp); }

}  // namespace

nd::Tensor encode(const SaeEncoder& encoder, const nd::Tensor& x) {
  return nd::forward(encoder.network, as_encoder_input(encoder, x));
}

nd::Tensor mean_activation(const SaeModel& model, std::span<const nd::Tensor> batch) {
  require_batch(batch);
  nd::Tensor sum({model.encoder.hidden()});
  for (const nd::Tensor& x : batch) sum += encode(model, x);
  sum *= 1.0 / static_cast<double>(batch.size());
  return sum;
}

double kl_penalty(double rho, const nd::Tensor& rho_hat) {
  check_rho(rho);
  double total = 0.0;
  for (double raw : rho_hat.data()) {
    if (!(raw >= 0.0 && raw <= 1.0)) {
      throw DomainError(fmt::format("mean activation {} lies outside [0, 1]", raw));
    }
    const double r = clamp_rho_hat(raw);
    total += rho * std::log(rho / r) + (1.0 - rho) * std::log((1.0 - rho) / (1.0 - r));
  }
  return total;
}

SparseLossGradients sparse_loss_gradients(const SaeModel& model, std::span<const nd::Tensor> batch) {
  require_batch(batch);
  check_rho(model.rho);
  const std::size_t m = batch.size();
  const std::size_t d = model.encoder.input_dim;
  const std::size_t hidden = model.encoder.hidden();

  std::vector<nd::Tensor> inputs;
  std::vector<nd::Tensor> acts;
  inputs.reserve(m);
  acts.reserve(m);
  nd::Tensor rho_hat({hidden});
  for (const nd::Tensor& x : batch) {
    inputs.push_back(as_encoder_input(model.encoder, x));
    acts.push_back(nd::forward(model.encoder.network, inputs.back()));
    rho_hat += acts.back();
  }
  rho_hat *= 1.0 / static_cast<double>(m);

  SparseLossGradients out;
  out.encoder = nd::zero_gradients(model.encoder.network);
  out.decoder = nd::zero_gradients(model.decoder);

  // d(beta * KL)/d a_ij = beta/m * (-(rho/r_j) + (1-rho)/(1-r_j)); zero where the clamp is active.
  nd::Tensor kl_grad({hidden});
  const double rho = model.rho;
  for (std::size_t j = 0; j < hidden; ++j) {
    const double r = rho_hat[j];
    if (r > kRhoHatClamp && r < 1.0 - kRhoHatClamp) {
      kl_grad[j] = model.beta / static_cast<double>(m) * (-rho / r + (1.0 - rho) / (1.0 - r));
    }
  }

  const double recon_scale = 1.0 / static_cast<double>(m * d);
  double recon = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const nd::Tensor recon_x = nd::forward(model.decoder, acts[i]);
    nd::Tensor upstream({d});
    for (std::size_t k = 0; k < d; ++k) {
      const double diff = recon_x[k] - batch[i][k];
      recon += diff * diff;
      upstream[k] = 2.0 * diff * recon_scale;
    }
    nd::Tensor grad_a = nd::backward_accumulate(model.decoder, acts[i], upstream, out.decoder);
    grad_a += kl_grad;
    nd::backward_accumulate(model.encoder.network, inputs[i], grad_a, out.encoder);
  }
  out.loss = recon * recon_scale + model.beta * kl_penalty(rho, rho_hat);
  return out;
}

double sparse_loss(const SaeModel& model, std::span<const nd::Tensor> batch) {
  require_batch(batch);
  const std::size_t d = model.encoder.input_dim;
  nd::Tensor rho_hat({model.encoder.hidden()});
  double recon = 0.0;
  for (const nd::Tensor& x : batch) {
    const nd::Tensor a = encode(model, x);
    rho_hat += a;
    const nd::Tensor r = nd::forward(model.decoder, a);
    for (std::size_t k = 0; k < d; ++k) recon += (r[k] - x[k]) * (r[k] - x[k]);
  }
  rho_hat *= 1.0 / static_cast<double>(batch.size());
  return recon / static_cast<double>(batch.size() * d) + model.beta * kl_penalty(model.rho, rho_hat);
}

SaeModel make_sae(std::size_t input_dim, const SaeArch& arch, double rho, double beta, std::uint64_t seed) {
  check_rho(rho);
  if (!(beta >= 0.0)) throw ConfigError(fmt::format("sae beta must be >= 0, got {}", beta));
  if (input_dim == 0 || arch.hidden == 0) throw ConfigError("sae input and hidden sizes must be positive");

  using nd::Layer;
  SaeModel model{.encoder = {.network = nd::Network({input_dim}, {}), .input_dim = input_dim},
                 .decoder = nd::Network({arch.hidden}, {Layer::dense(arch.hidden, input_dim), Layer::sigmoid()}),
                 .rho = rho,
                 .beta = beta};
  if (arch.encoder == EncoderArch::dense) {
    model.encoder.network = nd::Network({input_dim}, {Layer::dense(input_dim, arch.hidden), Layer::sigmoid()});
  } else {
    const std::size_t c = arch.conv_channels, k = arch.kernel_width;
    if (c == 0) throw ConfigError("sae conv_channels must be positive");
    model.encoder.network = nd::Network(
        {1, input_dim}, {Layer::conv1d(1, c, k), Layer::relu(),
                         Layer::residual({Layer::conv1d(c, c, k), Layer::relu(), Layer::conv1d(c, c, k)}),
                         Layer::flatten(), Layer::dense(c * input_dim, arch.hidden), Layer::sigmoid()});
  }
  nd::seeded_init(model.encoder.network, nd::mix_seed(seed, 1));
  nd::seeded_init(model.decoder, nd::mix_seed(seed, 2));
  return model;
}

SaeTrainResult train_sae(std::span<const nd::Tensor> data, const SaeArch& arch, const nd::SgdConfig& sgd, double rho,
                         double beta) {
  if (data.empty()) throw UsageError("train_sae needs at least one sample");
  sgd.validate();
  const nd::Shape shape = data.front().shape();
  if (shape.size() != 1) throw ShapeError("sae training samples must be rank-1 feature vectors");
  for (const nd::Tensor& x : data) {
    if (x.shape() != shape) throw ShapeError("sae training samples must share one shape");
    if (!x.all_finite()) throw DataError("sae training samples must be finite");
  }

  SaeModel model = make_sae(shape[0], arch, rho, beta, sgd.seed);
  const double initial = sparse_loss(model, data);
  if (!std::isfinite(initial)) throw TrainingError("sae initial loss is not finite");
  SaeTrainResult result{.model = model, .initial_loss = initial, .final_loss = initial, .epoch_loss = {}};

  nd::Rng rng(nd::mix_seed(sgd.seed, 3));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<nd::Tensor> batch;
  for (std::size_t epoch = 0; epoch < sgd.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += sgd.batch_size) {
      const std::size_t end = std::min(order.size(), start + sgd.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(data[order[i]]);
      SparseLossGradients g = sparse_loss_gradients(model, batch);
      if (!std::isfinite(g.loss)) throw TrainingError(fmt::format("sae loss diverged in epoch {}", epoch + 1));
      nd::sgd_step(model.encoder.network, g.encoder, sgd);
      nd::sgd_step(model.decoder, g.decoder, sgd);
    }
    const double loss = sparse_loss(model, data);
    if (!std::isfinite(loss)) throw TrainingError(fmt::format("sae loss diverged in epoch {}", epoch + 1));
    result.epoch_loss.push_back(loss);
    if (loss < result.final_loss) {
      result.final_loss = loss;
      result.model = model;
    }
  }
  return result;
}

}  // namespace cgb::sae
