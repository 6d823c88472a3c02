#include "cgboost/cgboost/boost.hpp"

#include <cmath>

#include <fmt/format.h>

#include "cgboost/error.hpp"
#include "cgboost/ndcore/rng.hpp"

namespace cgb::boost {

void BoostConfig::validate() const {
  if (stages == 0) throw ConfigError("boost stages must be >= 1");
  if (!(shrinkage > 0.0 && shrinkage <= 1.0)) {
    throw ConfigError(fmt::format("boost shrinkage must lie in (0, 1], got {}", shrinkage));
  }
  if (!std::isfinite(base_score)) throw ConfigError("boost base_score must be finite");
  if (!(l2_lambda >= 0.0) || !std::isfinite(l2_lambda)) {
    throw ConfigError(fmt::format("boost l2_lambda must be finite and >= 0, got {}", l2_lambda));
  }
  base.validate();
  sgd.validate();
}

GradHess grad_hess_square_loss(double y, double y_pred_prev) {
  if (!std::isfinite(y) || !std::isfinite(y_pred_prev)) throw DomainError("grad_hess_square_loss needs finite inputs");
  return {2.0 * (y_pred_prev - y), 2.0};
}

double stage_objective(std::span<const double> f, std::span<const double> g, std::span<const double> h, double l2,
                       double weights_norm_sq) {
  if (f.size() != g.size() || f.size() != h.size()) {
    throw ShapeError(fmt::format("stage_objective lengths differ: f {}, g {}, h {}", f.size(), g.size(), h.size()));
  }
  double obj = 0;
  for (std::size_t i = 0; i < f.size(); ++i) obj += g[i] * f[i] + 0.5 * h[i] * f[i] * f[i];
  return obj + l2 * weights_norm_sq;
}

nd::Network stage_start_network(const BoostConfig& cfg, std::size_t stage) {
  nd::Network net = resnet::build_resnet(cfg.base, nd::mix_seed(cfg.sgd.seed, 1000 + stage));
  net.mutable_layers().back().as<nd::DenseLayer>().weight.fill(0.0);
  return net;
}

namespace {

double mse_of(std::span<const resnet::RegressionSample> samples, std::span<const double> sums, double base_score,
              double shrinkage) {
  double se = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double e = samples[i].target - (base_score + shrinkage * sums[i]);
    se += e * e;
  }
  return se / static_cast<double>(samples.size());
}

}  // namespace

BoostEnsemble train_ensemble(std::span<const resnet::RegressionSample> samples, const BoostConfig& cfg,
                             std::vector<double>* fitted) {
  cfg.validate();
  if (samples.empty()) throw UsageError("train_ensemble needs at least one sample");
  for (const auto& s : samples) {
    if (s.x.shape() != cfg.base.input_shape()) {
      throw ShapeError(fmt::format("boost sample shape {} does not match base input {}", nd::shape_string(s.x.shape()),
                                   nd::shape_string(cfg.base.input_shape())));
    }
  }

  BoostEnsemble ens;
  ens.shrinkage = cfg.shrinkage;
  ens.base_score = cfg.base_score;
  // y_hat_i = base_score + eta * sums_i, with sums accumulated in stage order
  // exactly as predict() does.
  std::vector<double> sums(samples.size(), 0.0);
  ens.initial_train_mse = mse_of(samples, sums, ens.base_score, ens.shrinkage);

  std::vector<resnet::RegressionSample> residuals(samples.begin(), samples.end());
  for (std::size_t t = 1; t <= cfg.stages; ++t) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const GradHess gh = grad_hess_square_loss(samples[i].target, ens.base_score + ens.shrinkage * sums[i]);
      residuals[i].target = -gh.g / gh.h;
    }
    nd::SgdConfig sgd = cfg.sgd;
    sgd.l2_lambda = cfg.l2_lambda;
    sgd.seed = nd::mix_seed(cfg.sgd.seed, 2000 + t);
    resnet::FitResult fit = [&] {
      try {
        return resnet::fit_regressor(stage_start_network(cfg, t), residuals, sgd);
      } catch (const TrainingError& e) {
        throw TrainingError(fmt::format("boost stage {}: {}", t, e.what()));
      }
    }();
    for (std::size_t i = 0; i < samples.size(); ++i) sums[i] += resnet::predict_scalar(fit.network, samples[i].x);
    ens.base_models.push_back(std::move(fit.network));
    ens.stage_train_mse.push_back(mse_of(samples, sums, ens.base_score, ens.shrinkage));
    ens.stage_epoch_loss.push_back(std::move(fit.epoch_loss));
  }
  if (fitted) {
    fitted->resize(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) (*fitted)[i] = ens.base_score + ens.shrinkage * sums[i];
  }
  return ens;
}

std::vector<double> stage_outputs(const BoostEnsemble& ens, const nd::Tensor& x) {
  std::vector<double> out;
  out.reserve(ens.base_models.size());
  for (const auto& f : ens.base_models) out.push_back(resnet::predict_scalar(f, x));
  return out;
}

double predict(const BoostEnsemble& ens, const nd::Tensor& x) {
  double sum = 0;
  for (const auto& f : ens.base_models) sum += resnet::predict_scalar(f, x);
  return ens.base_score + ens.shrinkage * sum;
}

double predict_price(const BoostEnsemble& ens, const nd::Tensor& x, double close_today) {
  if (!(close_today > 0.0) || !std::isfinite(close_today)) {
    throw DomainError(fmt::format("predict_price needs a positive close, got {}", close_today));
  }
  return close_today * (1.0 + predict(ens, x));
}

BoostEnsemble truncated(const BoostEnsemble& ens, std::size_t stages) {
  if (stages > ens.stages()) {
    throw UsageError(fmt::format("cannot truncate a {}-stage ensemble to {} stages", ens.stages(), stages));
  }
  BoostEnsemble out = ens;
  out.base_models.erase(out.base_models.begin() + static_cast<std::ptrdiff_t>(stages), out.base_models.end());
  if (out.stage_train_mse.size() > stages) out.stage_train_mse.resize(stages);
  if (out.stage_epoch_loss.size() > stages) out.stage_epoch_loss.resize(stages);
  return out;
}

double ensemble_mse(const BoostEnsemble& ens, std::span<const resnet::RegressionSample> samples) {
  if (samples.empty()) throw UsageError("ensemble_mse needs at least one sample");
  double se = 0;
  for (const auto& s : samples) {
    const double e = s.target - predict(ens, s.x);
    se += e * e;
  }
  return se / static_cast<double>(samples.size());
}

}  // namespace cgb::boost
