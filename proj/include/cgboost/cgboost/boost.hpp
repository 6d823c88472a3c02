#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cgboost/ndcore/network.hpp"
#include "cgboost/ndcore/sgd.hpp"
#include "cgboost/resnet1d/resnet.hpp"

namespace cgb::boost {

struct BoostConfig {
  std::size_t stages = 10;  // T
  double shrinkage = 0.3;   // eta in (0, 1]; 1 gives the unshrunk sum
  double base_score = 0.0;
  double l2_lambda = 0.0;  // Omega coefficient; overrides sgd.l2_lambda for every stage
  resnet::ResNetConfig base;
  nd::SgdConfig sgd{.learning_rate = 0.01, .l2_lambda = 0.0, .batch_size = 32, .epochs = 20, .seed = 0};

  void validate() const;
};

struct BoostEnsemble {
  std::vector<nd::Network> base_models;
  double shrinkage = 1.0;
  double base_score = 0.0;
  double initial_train_mse = 0.0;          // MSE of base_score alone
  std::vector<double> stage_train_mse;     // after each stage
  std::vector<std::vector<double>> stage_epoch_loss;

  std::size_t stages() const { return base_models.size(); }
};

struct GradHess {
  double g;
  double h;
};

// First and second derivative of (y_pred - y)^2 at y_pred = y_pred_prev.
GradHess grad_hess_square_loss(double y, double y_pred_prev);

// sum_i [g_i f_i + h_i f_i^2 / 2] + l2 * weights_norm_sq.
double stage_objective(std::span<const double> f, std::span<const double> g, std::span<const double> h, double l2,
                       double weights_norm_sq);

// The untrained learner for stage t (1-based): a seeded residual CNN whose
// head is zeroed, so it starts as f == 0.
nd::Network stage_start_network(const BoostConfig& cfg, std::size_t stage);

// Each stage fits a base learner to the residuals y - y_hat by least squares
// with weight decay l2_lambda, then y_hat += eta * f_t. When `fitted` is given
// it receives the final y_hat for every sample.
BoostEnsemble train_ensemble(std::span<const resnet::RegressionSample> samples, const BoostConfig& cfg,
                             std::vector<double>* fitted = nullptr);

// f_t(x) for every stage.
std::vector<double> stage_outputs(const BoostEnsemble& ens, const nd::Tensor& x);

// base_score + eta * sum_t f_t(x).
double predict(const BoostEnsemble& ens, const nd::Tensor& x);

// close_today * (1 + predict(ens, x)).
double predict_price(const BoostEnsemble& ens, const nd::Tensor& x, double close_today);

// The first `stages` base models with the matching training record.
BoostEnsemble truncated(const BoostEnsemble& ens, std::size_t stages);

double ensemble_mse(const BoostEnsemble& ens, std::span<const resnet::RegressionSample> samples);

}  // namespace cgb::boost
