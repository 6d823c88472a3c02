#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cgboost/ndcore/network.hpp"
#include "cgboost/ndcore/sgd.hpp"

namespace cgb::sae {

inline constexpr double kRhoHatClamp = 1e-7;

enum class EncoderArch {
  dense,          // dense(d -> hidden) -> sigmoid
  residual_conv,  // conv -> relu -> residual(conv, relu, conv) -> flatten -> dense -> sigmoid
};

struct SaeArch {
  std::size_t hidden = 8;  // s2
  EncoderArch encoder = EncoderArch::dense;
  std::size_t conv_channels = 4;
  std::size_t kernel_width = 3;
};

// The part of a trained autoencoder that survives into the forecasting
// pipeline. Inputs are per-day feature vectors of length input_dim.
struct SaeEncoder {
  nd::Network network;
  std::size_t input_dim = 0;

  std::size_t hidden() const { return network.output_shape()[0]; }
};

struct SaeModel {
  SaeEncoder encoder;
  nd::Network decoder;  // hidden -> input_dim, sigmoid output
  double rho = 0.05;
  double beta = 0.1;
};

// Encoder output a(x), each component in (0, 1).
nd::Tensor encode(const SaeEncoder& encoder, const nd::Tensor& x);
inline nd::Tensor encode(const SaeModel& model, const nd::Tensor& x) { return encode(model.encoder, x); }

// rho_hat_j = (1/m) sum_i a_j(x_i).
nd::Tensor mean_activation(const SaeModel& model, std::span<const nd::Tensor> batch);

// sum_j KL(rho || rho_hat_j) for Bernoulli means; rho_hat is clamped to
// [1e-7, 1 - 1e-7] first.
double kl_penalty(double rho, const nd::Tensor& rho_hat);

// Mean squared reconstruction error (per element, averaged over the batch)
// plus beta * kl_penalty(rho, rho_hat).
double sparse_loss(const SaeModel& model, std::span<const nd::Tensor> batch);

struct SparseLossGradients {
  double loss = 0;
  std::vector<nd::Tensor> encoder;  // aligned with encoder.network.parameters()
  std::vector<nd::Tensor> decoder;
};

// Exact gradient of sparse_loss, including the KL term's dependence on every
// sample's activation through rho_hat.
SparseLossGradients sparse_loss_gradients(const SaeModel& model, std::span<const nd::Tensor> batch);

SaeModel make_sae(std::size_t input_dim, const SaeArch& arch, double rho, double beta, std::uint64_t seed);

struct SaeTrainResult {
  SaeModel model;
  double initial_loss = 0;
  double final_loss = 0;
  std::vector<double> epoch_loss;  // full-data J_sparse after each epoch
};

// Mini-batch SGD on J_sparse with rho_hat estimated per batch. Returns the
// lowest full-data loss snapshot seen (the seeded initial model included), so
// final_loss <= initial_loss. Throws TrainingError on a non-finite loss.
SaeTrainResult train_sae(std::span<const nd::Tensor> data, const SaeArch& arch, const nd::SgdConfig& sgd, double rho,
                         double beta);

}  // namespace cgb::sae
