// Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero if any
// criterion fails. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "cgboost/cgboost/boost.hpp"
#include "cgboost/cli/commands.hpp"
#include "cgboost/cli/gradient_suite.hpp"
#include "cgboost/cli/model_file.hpp"
#include "cgboost/cli/synthetic.hpp"
#include "cgboost/eval/metrics.hpp"
#include "cgboost/eval/report.hpp"
#include "cgboost/features/indicators.hpp"
#include "cgboost/ndcore/rng.hpp"
#include "cgboost/resnet1d/resnet.hpp"
#include "cgboost/sae/sae.hpp"
#include "oracles.hpp"
#include "reference_data.hpp"

namespace {

using namespace cgb;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

nd::Tensor random_tensor(const nd::Shape& shape, nd::Rng& rng, double scale = 1.0) {
  nd::Tensor t(shape);
  for (double& v : t.data()) v = rng.uniform(-scale, scale);
  return t;
}

Outcome gradient_suite() {
  const cli::GradientSuiteResult r = cli::run_gradient_suite(2024, 100, {.relative = 1e-4});
  std::string detail;
  for (const auto& e : r.entries) {
    if (e.cases < 100) return {false, fmt::format("{} ran only {} cases", e.name, e.cases)};
    if (!e.stats.ok()) detail += fmt::format("{}: {} failures; ", e.name, e.stats.failures);
  }
  double worst_abs = 0, worst_rel = 0;
  for (const auto& e : r.entries) {
    worst_abs = std::max(worst_abs, e.stats.worst_absolute);
    worst_rel = std::max(worst_rel, e.stats.worst_relative);
  }
  detail += fmt::format("{} checks x 100 cases, worst rel {:.2g}, worst abs {:.2g}", r.entries.size(), worst_rel,
                        worst_abs);
  return {r.ok(), detail};
}

Outcome conv_oracle() {
  nd::Rng rng(3);
  double worst = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t cin = 1 + rng.below(5), cout = 1 + rng.below(5), len = 1 + rng.below(80);
    const std::size_t k = 1 + 2 * rng.below(4);
    const nd::Tensor x = random_tensor({cin, len}, rng), w = random_tensor({cout, cin, k}, rng),
                     b = random_tensor({cout}, rng);
    const auto expect = test::conv1d_bruteforce(x.values(), cin, len, w.values(), cout, k, b.values());
    const nd::Tensor y = nd::conv1d_forward(x, w, b);
    if (y.size() != expect.size()) return {false, "output size differs from oracle"};
    for (std::size_t i = 0; i < y.size(); ++i) worst = std::max(worst, std::abs(y[i] - expect[i]));
  }
  return {worst <= 1e-12, fmt::format("200 shapes, max |diff| {:.2g}", worst)};
}

Outcome residual_identity() {
  nd::Rng rng(4);
  std::size_t checked = 0;
  for (int i = 0; i < 100; ++i) {
    const resnet::ResNetConfig cfg{.input_channels = 1 + rng.below(4),
                                   .window_len = 2 + rng.below(12),
                                   .blocks = 1 + rng.below(3),
                                   .channels = 1 + rng.below(5),
                                   .kernel_width = 1 + 2 * rng.below(3)};
    // Freshly built network: every block starts as an identity.
    const nd::Network deep = resnet::build_resnet(cfg, rng.next_u64());
    std::vector<nd::Layer> plain;
    for (const auto& l : deep.layers())
      if (l.kind() != nd::LayerKind::residual) plain.push_back(l);
    const nd::Network shallow(deep.input_shape(), plain);
    // Trained-looking network with one more zero-initialized block inserted.
    nd::Network base = deep;
    for (auto& p : base.parameters())
      for (double& v : p.tensor->data()) v = rng.uniform(-0.8, 0.8);
    std::vector<nd::Layer> layers = base.layers();
    nd::Layer block = resnet::zero_residual_block(cfg);
    for (double& v : block.as<nd::ResidualBlock>().inner.front().as<nd::Conv1dLayer>().kernel.data())
      v = rng.uniform(-1, 1);
    layers.insert(layers.begin() + static_cast<std::ptrdiff_t>(2 + rng.below(cfg.blocks + 1)), block);
    const nd::Network deeper(base.input_shape(), layers);
    for (int k = 0; k < 10; ++k) {
      const nd::Tensor x = random_tensor(cfg.input_shape(), rng, 3.0);
      if (!(nd::forward(deep, x) == nd::forward(shallow, x))) return {false, "deep != shallow"};
      if (!(nd::forward(deeper, x) == nd::forward(base, x))) return {false, "zero block changed the output"};
      ++checked;
    }
  }
  return {true, fmt::format("{} inputs bit-exact", checked)};
}

Outcome boosting_structure() {
  nd::Rng rng(5);
  double worst = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t n = 1 + rng.below(64);
    std::vector<double> f(n), g(n), h(n), zero(n, 0.0);
    double lhs = 0, rhs = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const boost::GradHess gh = boost::grad_hess_square_loss(rng.uniform(-2, 2), rng.uniform(-2, 2));
      g[i] = gh.g;
      h[i] = gh.h;
      f[i] = rng.uniform(-2, 2);
      const double r = -g[i] / h[i];
      lhs += (f[i] - r) * (f[i] - r);
      rhs += r * r;
    }
    const double diff = boost::stage_objective(f, g, h, 0, 0) - boost::stage_objective(zero, g, h, 0, 0);
    worst = std::max(worst, std::abs(diff - (lhs - rhs)));
  }
  if (worst > 1e-10) return {false, fmt::format("completing the square off by {:.2g}", worst)};

  std::vector<resnet::RegressionSample> samples;
  for (auto& s : test::sinusoid_dataset(200, 12, 7)) samples.push_back({std::move(s.x), s.y});
  boost::BoostConfig cfg;
  cfg.stages = 10;
  cfg.shrinkage = 0.3;
  cfg.base = {.input_channels = 2, .window_len = 12, .blocks = 1, .channels = 4, .kernel_width = 3};
  cfg.sgd = {.learning_rate = 0.02, .l2_lambda = 0.0, .batch_size = 16, .epochs = 8, .seed = 3};
  const boost::BoostEnsemble ens = boost::train_ensemble(samples, cfg);
  double prev = ens.initial_train_mse, worst_rise = 0;
  for (double mse : ens.stage_train_mse) {
    worst_rise = std::max(worst_rise, mse - prev);
    prev = mse;
  }
  return {ens.stage_train_mse.size() == 10 && worst_rise <= 1e-9,
          fmt::format("identity max err {:.2g}; train mse {:.4g} -> {:.4g} over 10 stages, max rise {:.2g}", worst,
                      ens.initial_train_mse, prev, worst_rise)};
}

Outcome sae_sparsity() {
  const auto data = test::latent_line_dataset(200, 8, 99);
  const double rho = 0.05;
  const sae::SaeArch arch{.hidden = 10};
  const nd::SgdConfig sgd{.learning_rate = 0.5, .l2_lambda = 0.0, .batch_size = 10, .epochs = 100, .seed = 17};
  const sae::SaeTrainResult free = sae::train_sae(data, arch, sgd, rho, 0.0);
  const sae::SaeTrainResult sparse = sae::train_sae(data, arch, sgd, rho, 1.0);
  const nd::Tensor a = sae::mean_activation(free.model, data), b = sae::mean_activation(sparse.model, data);
  std::size_t closer = 0;
  for (std::size_t j = 0; j < a.size(); ++j)
    if (std::abs(b[j] - rho) < std::abs(a[j] - rho)) ++closer;
  const double share = static_cast<double>(closer) / static_cast<double>(a.size());
  const bool halved = sparse.final_loss < 0.5 * sparse.initial_loss;
  return {share >= 0.9 && halved, fmt::format("{}/{} units closer to rho; J {:.4g} -> {:.4g}", closer, a.size(),
                                              sparse.initial_loss, sparse.final_loss)};
}

Outcome metric_oracles() {
  nd::Rng rng(6);
  double worst = 0;
  bool bounded = true;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t n = 2 + rng.below(100);
    std::vector<double> a(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.uniform(1, 5000);
      p[i] = rep % 3 == 0 ? rng.uniform(-5000, 5000) : a[i] * (1 + 0.05 * rng.normal());
    }
    const double u = eval::theil_u(a, p);
    bounded &= u >= 0.0 && u <= 1.0;
    worst = std::max({worst, std::abs(eval::mape(a, p) - test::mape_oracle(a, p)),
                      std::abs(eval::correlation(a, p) - test::pearson_oracle(a, p)),
                      std::abs(u - test::theil_oracle(a, p))});
  }
  const std::vector<double> a{100, 102, 99, 105};
  const bool perfect = eval::mape(a, a) == 0.0 && std::abs(eval::correlation(a, a) - 1.0) <= 1e-12 &&
                       eval::theil_u(a, a) == 0.0;
  return {worst <= 1e-12 && bounded && perfect,
          fmt::format("1000 pairs, max |diff| {:.2g}, U in [0,1]: {}, perfect (0,1,0): {}", worst, bounded, perfect)};
}

// Shared by criteria 8 and 9.
struct BacktestRun {
  bool ran = false;
  std::string error;
  eval::EvalReport report;
  std::string json_a, json_b, csv_a, csv_b;
  double seconds = 0;
};

BacktestRun& backtest_run() {
  static BacktestRun run;
  if (run.ran) return run;
  run.ran = true;
  try {
    cli::SyntheticSpec spec;
    spec.days = 2340;
    spec.seed = 7;
    spec.regime = cli::Regime::sinusoid;
    const std::vector<features::SeriesFrame> frames{cli::generate_synthetic(spec)};
    eval::PipelineConfig cfg;
    cfg.seed = 7;
    const auto start = Clock::now();
    run.report = eval::run_backtest(frames, cfg);
    run.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    run.json_a = eval::report_json(run.report);
    run.csv_a = eval::predictions_csv(run.report);
    const eval::EvalReport again = eval::run_backtest(frames, cfg);
    run.json_b = eval::report_json(again);
    run.csv_b = eval::predictions_csv(again);
  } catch (const std::exception& e) {
    run.error = e.what();
  }
  return run;
}

Outcome end_to_end() {
  const BacktestRun& run = backtest_run();
  if (!run.error.empty()) return {false, run.error};
  std::size_t years = 0, wins = 0;
  std::string per_year;
  for (const auto& y : run.report.years) {
    ++years;
    if (y.model.mape < y.naive.mape) ++wins;
    per_year += fmt::format(" y{} {:.4f}/{:.4f}", y.year, y.model.mape, y.naive.mape);
  }
  const bool identical = run.json_a == run.json_b && run.csv_a == run.csv_b;
  return {years == 6 && wins >= 4 && identical && run.seconds < 900.0,
          fmt::format("model beats naive in {}/{} years (mape model/naive:{}); rerun identical: {}; one run {:.0f} s",
                      wins, years, per_year, identical, run.seconds)};
}

Outcome leakage_audit() {
  const BacktestRun& run = backtest_run();
  if (!run.error.empty()) return {false, run.error};
  bool ok = run.report.audit_passed() && !run.report.audit.empty();
  std::size_t entries = run.report.audit.size();

  // Pooled mode stamps the shared statistics with the union of index ranges.
  std::vector<features::SeriesFrame> frames;
  for (std::uint64_t i = 0; i < 3; ++i) {
    cli::SyntheticSpec spec;
    spec.days = features::kWarmupRows + 160;
    spec.seed = 50 + i;
    spec.index_name = fmt::format("P{}", i);
    spec.regime = i % 2 ? cli::Regime::gbm : cli::Regime::sinusoid;
    frames.push_back(cli::generate_synthetic(spec));
  }
  eval::PipelineConfig cfg;
  cfg.mode = eval::PoolMode::pooled;
  cfg.features.window_len = 5;
  cfg.sae.arch.hidden = 3;
  cfg.sae.sgd.epochs = 2;
  cfg.boost.stages = 2;
  cfg.boost.base.channels = 2;
  cfg.boost.base.blocks = 1;
  cfg.boost.sgd.epochs = 1;
  cfg.split = {eval::SplitUnit::trading_days, 60, 10, 10, 10, 4};
  const eval::EvalReport pooled = eval::run_backtest(frames, cfg);
  ok &= pooled.audit_passed() && !pooled.audit.empty();
  entries += pooled.audit.size();
  return {ok, fmt::format("{} stamped statistics (per-index and pooled) all precede their test windows", entries)};
}

Outcome serialization() {
  cli::SyntheticSpec spec;
  spec.days = features::kWarmupRows + 200;
  spec.seed = 11;
  const features::SeriesFrame frame = cli::generate_synthetic(spec);
  eval::PipelineConfig cfg;
  cfg.seed = 11;
  cfg.sae.sgd.epochs = 5;
  cfg.boost.stages = 3;
  cfg.boost.sgd.epochs = 3;
  const cli::TrainedModel trained = cli::train_model(cfg, {frame}, {"synthetic"});
  const std::string bytes = cli::serialize_model(trained.model);
  const std::string path = (std::filesystem::temp_directory_path() / "cgboost_acceptance_model.bin").string();
  cli::save_model(path, trained.model);
  const cli::PipelineModel loaded = cli::load_model(path);
  std::filesystem::remove(path);
  const bool stable = cli::serialize_model(loaded) == bytes;

  const eval::FittedPipeline& a = trained.model.pipeline;
  nd::Rng rng(12);
  std::size_t equal = 0;
  for (int i = 0; i < 100; ++i) {
    nd::Tensor x({a.encoder.hidden(), a.window_len});
    for (double& v : x.data()) v = rng.uniform();
    if (eval::forecast_rate(a, x) == eval::forecast_rate(loaded.pipeline, x)) ++equal;
  }
  const auto pa = cli::predict_series(trained.model, frame), pb = cli::predict_series(loaded, frame);
  bool series_equal = pa.size() == pb.size();
  for (std::size_t i = 0; series_equal && i < pa.size(); ++i)
    series_equal = pa[i].predicted_rate == pb[i].predicted_rate;
  return {stable && equal == 100 && series_equal,
          fmt::format("save/load/save identical: {}; {}/100 probes exact; {} series forecasts exact: {}", stable, equal,
                      pa.size(), series_equal)};
}

struct Criterion {
  int number;
  std::string name;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {2, "gradient suite", 60, gradient_suite},
      {3, "conv1d oracle", 10, conv_oracle},
      {4, "residual identity", 0, residual_identity},
      {5, "boosting structure", 300, boosting_structure},
      {6, "sae sparsity", 120, sae_sparsity},
      {7, "metric oracles", 0, metric_oracles},
      {8, "end-to-end synthetic backtest", 0, end_to_end},
      {9, "no-leakage audit", 0, leakage_audit},
      {10, "model serialization", 0, serialization},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!wanted.empty() && !wanted.count(c.number)) continue;
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, fmt::format("threw: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    if (c.limit_seconds > 0 && secs >= c.limit_seconds) {
      o.pass = false;
      o.detail += fmt::format("; exceeded {:.0f} s limit", c.limit_seconds);
    }
    if (!o.pass) ++failed;
    fmt::print("criterion {:>2} {} {} ({:.2f} s): {}\n", c.number, o.pass ? "PASS" : "FAIL", c.name, secs, o.detail);
    std::fflush(stdout);
  }
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
