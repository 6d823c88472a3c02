#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "cgboost/cgboost/boost.hpp"
#include "cgboost/error.hpp"
#include "cgboost/ndcore/rng.hpp"
#include "reference_data.hpp"

namespace cgb::boost {
namespace {

using resnet::RegressionSample;

std::vector<RegressionSample> sinusoid_samples(std::size_t n, std::uint64_t seed) {
  std::vector<RegressionSample> out;
  for (auto& s : test::sinusoid_dataset(n, 12, seed)) out.push_back({std::move(s.x), s.y});
  return out;
}

BoostConfig small_config() {
  BoostConfig cfg;
  cfg.stages = 4;
  cfg.shrinkage = 0.5;
  cfg.base = {.input_channels = 2, .window_len = 12, .blocks = 1, .channels = 4, .kernel_width = 3};
  cfg.sgd = {.learning_rate = 0.02, .l2_lambda = 0.0, .batch_size = 16, .epochs = 8, .seed = 3};
  return cfg;
}

nd::Network constant_model(double value) {
  nd::Network net({1}, {nd::Layer::dense(1, 1)});
  net.mutable_layers()[0].as<nd::DenseLayer>().bias[0] = value;
  return net;
}

TEST(GradHessTest, Examples) {
  const GradHess at_min = grad_hess_square_loss(0.3, 0.3);
  EXPECT_EQ(at_min.g, 0.0);
  EXPECT_EQ(at_min.h, 2.0);
  const GradHess gh = grad_hess_square_loss(1.0, 3.0);
  EXPECT_EQ(gh.g, 4.0);
  EXPECT_EQ(gh.h, 2.0);
  EXPECT_THROW(grad_hess_square_loss(NAN, 1.0), DomainError);
}

TEST(GradHessTest, MatchesFiniteDifference) {
  nd::Rng rng(1);
  const double step = 1e-5;
  for (int i = 0; i < 1000; ++i) {
    const double y = rng.uniform(-3, 3), p = rng.uniform(-3, 3);
    auto loss = [&](double q) { return (q - y) * (q - y); };
    const double fd = (loss(p + step) - loss(p - step)) / (2 * step);
    EXPECT_NEAR(grad_hess_square_loss(y, p).g, fd, 1e-8);
  }
}

TEST(StageObjectiveTest, Examples) {
  const std::vector<double> zero{0, 0, 0}, g{1, -2, 3}, h{2, 2, 2};
  EXPECT_EQ(stage_objective(zero, g, h, 0.0, 0.0), 0.0);
  EXPECT_EQ(stage_objective(std::vector<double>{-2}, std::vector<double>{4}, std::vector<double>{2}, 0.0, 0.0), -4.0);
  EXPECT_EQ(stage_objective(zero, g, h, 0.5, 3.0), 1.5);
  EXPECT_THROW(stage_objective(std::vector<double>{1, 2}, g, h, 0.0, 0.0), ShapeError);
}

TEST(StageObjectiveTest, CompletingTheSquare) {
  nd::Rng rng(2);
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t n = 1 + rng.below(50);
    std::vector<double> f(n), g(n), h(n), zero(n, 0.0);
    double lhs_sq = 0, r_sq = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const GradHess gh = grad_hess_square_loss(rng.uniform(-2, 2), rng.uniform(-2, 2));
      g[i] = gh.g;
      h[i] = gh.h;
      f[i] = rng.uniform(-2, 2);
      const double r = -g[i] / h[i];
      lhs_sq += (f[i] - r) * (f[i] - r);
      r_sq += r * r;
    }
    const double diff = stage_objective(f, g, h, 0.0, 0.0) - stage_objective(zero, g, h, 0.0, 0.0);
    EXPECT_NEAR(diff, lhs_sq - r_sq, 1e-10);
  }
}

TEST(PredictTest, ZeroModelsGiveBaseScore) {
  BoostEnsemble ens{.base_models = {constant_model(0.0), constant_model(0.0)}, .shrinkage = 0.3, .base_score = 0.25};
  EXPECT_EQ(predict(ens, nd::Tensor::vector({5.0})), 0.25);
}

TEST(PredictTest, Additivity) {
  BoostEnsemble ens{.base_models = {constant_model(0.1), constant_model(-0.04)}, .shrinkage = 1.0};
  EXPECT_NEAR(predict(ens, nd::Tensor::vector({1.0})), 0.06, 1e-15);
  EXPECT_EQ(stage_outputs(ens, nd::Tensor::vector({1.0})), (std::vector<double>{0.1, -0.04}));
}

TEST(PredictTest, AdditivityOnTrainedEnsembleIsBitExact) {
  const auto samples = sinusoid_samples(64, 4);
  const BoostEnsemble ens = train_ensemble(samples, small_config());
  for (const auto& s : samples) {
    double sum = 0;
    for (const auto& f : ens.base_models) sum += nd::forward(f, s.x)[0];
    EXPECT_EQ(predict(ens, s.x), ens.base_score + ens.shrinkage * sum);
  }
}

TEST(PredictTest, ShapeMismatch) {
  const BoostEnsemble ens{.base_models = {constant_model(0.1)}};
  EXPECT_THROW(predict(ens, nd::Tensor::vector({1.0, 2.0})), ShapeError);
}

TEST(PredictPriceTest, Definition) {
  const BoostEnsemble flat{.base_models = {constant_model(0.0)}};
  EXPECT_EQ(predict_price(flat, nd::Tensor::vector({1.0}), 123.5), 123.5);
  const BoostEnsemble up{.base_models = {constant_model(0.02)}};
  EXPECT_NEAR(predict_price(up, nd::Tensor::vector({1.0}), 100.0), 102.0, 1e-12);
  EXPECT_THROW(predict_price(up, nd::Tensor::vector({1.0}), 0.0), DomainError);
  EXPECT_THROW(predict_price(up, nd::Tensor::vector({1.0}), -5.0), DomainError);

  nd::Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const BoostEnsemble e{.base_models = {constant_model(rng.uniform(-0.1, 0.1))}, .shrinkage = rng.uniform(0.1, 1)};
    const nd::Tensor x = nd::Tensor::vector({1.0});
    const double close = rng.uniform(1, 5000);
    EXPECT_NEAR((predict_price(e, x, close) - close) / close, predict(e, x), 1e-12);
  }
}

TEST(BoostConfigTest, Validation) {
  BoostConfig cfg = small_config();
  cfg.stages = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.shrinkage = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.shrinkage = 1.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.base.kernel_width = 2;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(StageStartTest, StartsAtZeroFunction) {
  const BoostConfig cfg = small_config();
  const auto samples = sinusoid_samples(10, 1);
  for (std::size_t t = 1; t <= 3; ++t) {
    const nd::Network net = stage_start_network(cfg, t);
    for (const auto& s : samples) EXPECT_EQ(nd::forward(net, s.x)[0], 0.0);
  }
  EXPECT_FALSE(stage_start_network(cfg, 1) == stage_start_network(cfg, 2));
}

TEST(TrainEnsembleTest, SingleUnshrunkStageIsPlainFit) {
  BoostConfig cfg = small_config();
  cfg.stages = 1;
  cfg.shrinkage = 1.0;
  const auto samples = sinusoid_samples(48, 6);
  const BoostEnsemble ens = train_ensemble(samples, cfg);
  nd::SgdConfig sgd = cfg.sgd;
  sgd.seed = nd::mix_seed(cfg.sgd.seed, 2001);
  const resnet::FitResult fit = resnet::fit_regressor(stage_start_network(cfg, 1), samples, sgd);
  ASSERT_EQ(ens.stages(), 1u);
  EXPECT_EQ(ens.base_models[0], fit.network);
  for (const auto& s : samples) EXPECT_EQ(predict(ens, s.x), resnet::predict_scalar(fit.network, s.x));
}

TEST(TrainEnsembleTest, TrainMseNonIncreasingOnSinusoid) {
  BoostConfig cfg = small_config();
  cfg.stages = 10;
  cfg.shrinkage = 0.3;
  const auto samples = sinusoid_samples(200, 7);
  const BoostEnsemble ens = train_ensemble(samples, cfg);
  ASSERT_EQ(ens.stage_train_mse.size(), 10u);
  double prev = ens.initial_train_mse;
  for (double mse : ens.stage_train_mse) {
    EXPECT_LE(mse, prev + 1e-9);
    prev = mse;
  }
  EXPECT_LT(ens.stage_train_mse.back(), 0.5 * ens.initial_train_mse);
}

TEST(TrainEnsembleTest, FittedValuesMatchPredict) {
  const auto samples = sinusoid_samples(64, 8);
  std::vector<double> fitted;
  const BoostEnsemble ens = train_ensemble(samples, small_config(), &fitted);
  ASSERT_EQ(fitted.size(), samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) EXPECT_NEAR(predict(ens, samples[i].x), fitted[i], 1e-12);
}

TEST(TrainEnsembleTest, TruncationMatchesRecordedStage) {
  const auto samples = sinusoid_samples(64, 9);
  const BoostEnsemble ens = train_ensemble(samples, small_config());
  for (std::size_t k = 1; k <= ens.stages(); ++k) {
    const BoostEnsemble head = truncated(ens, k);
    EXPECT_EQ(head.stages(), k);
    EXPECT_EQ(ensemble_mse(head, samples), ens.stage_train_mse[k - 1]);
  }
  EXPECT_EQ(ensemble_mse(truncated(ens, 0), samples), ens.initial_train_mse);
  EXPECT_THROW(truncated(ens, ens.stages() + 1), UsageError);
}

TEST(TrainEnsembleTest, ZeroTargetsRidgeLimitPredictsZero) {
  BoostConfig cfg = small_config();
  cfg.l2_lambda = 10.0;
  auto samples = sinusoid_samples(40, 10);
  double sx = 0, sxx = 0, count = 0;
  for (auto& s : samples) {
    s.target = 0.0;
    for (double v : s.x.data()) {
      sx += v;
      sxx += v * v;
      ++count;
    }
  }
  const double std_x = std::sqrt(sxx / count - (sx / count) * (sx / count));
  const BoostEnsemble ens = train_ensemble(samples, cfg);
  for (const auto& s : samples) EXPECT_LT(std::abs(predict(ens, s.x)), 0.01 * std_x);
}

TEST(TrainEnsembleTest, DeterministicPerSeed) {
  const auto samples = sinusoid_samples(48, 11);
  const BoostEnsemble a = train_ensemble(samples, small_config());
  const BoostEnsemble b = train_ensemble(samples, small_config());
  ASSERT_EQ(a.stages(), b.stages());
  for (std::size_t t = 0; t < a.stages(); ++t) EXPECT_EQ(a.base_models[t], b.base_models[t]);
  EXPECT_EQ(a.stage_train_mse, b.stage_train_mse);
}

TEST(TrainEnsembleTest, InputErrors) {
  EXPECT_THROW(train_ensemble(std::vector<RegressionSample>{}, small_config()), UsageError);
  std::vector<RegressionSample> wrong{{nd::Tensor({3, 12}), 0.0}};
  EXPECT_THROW(train_ensemble(wrong, small_config()), ShapeError);
}

}  // namespace
}  // namespace cgb::boost
