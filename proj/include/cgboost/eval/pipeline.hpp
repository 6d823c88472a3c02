#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cgboost/cgboost/boost.hpp"
#include "cgboost/eval/split.hpp"
#include "cgboost/features/normalizer.hpp"
#include "cgboost/features/series.hpp"
#include "cgboost/sae/sae.hpp"

namespace cgb::eval {

// per_index trains one model per market index; pooled trains one model on the
// samples of every index.
enum class PoolMode { per_index, pooled };

std::string_view pool_mode_name(PoolMode mode);
PoolMode parse_pool_mode(std::string_view name);

struct FeatureConfig {
  std::size_t window_len = 20;
  double clip_low = 0.005;
  double clip_high = 0.995;
};

struct SaeStageConfig {
  sae::SaeArch arch;
  double rho = 0.05;
  double beta = 0.1;
  nd::SgdConfig sgd{.learning_rate = 0.5, .l2_lambda = 0.0, .batch_size = 32, .epochs = 30, .seed = 0};
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  PoolMode mode = PoolMode::per_index;
  std::size_t threads = 1;
  FeatureConfig features;
  SaeStageConfig sae;
  // base.input_channels and base.window_len are derived from sae.arch.hidden
  // and features.window_len; every sgd seed is derived from `seed`.
  boost::BoostConfig boost;
  SplitConfig split;

  void validate() const;
  // The boost config with derived fields filled in.
  boost::BoostConfig resolved_boost() const;
  nd::SgdConfig resolved_sae_sgd() const;
};

struct StatisticStamp {
  std::string statistic;  // "normalizer", "sae", "ensemble"
  std::string index;
  features::DataStamp range;
};

// Everything needed to turn raw indicator rows into change-rate forecasts.
struct FittedPipeline {
  std::vector<std::string> index_names;
  std::vector<std::string> feature_columns;
  std::vector<features::Normalizer> normalizers;  // one per index
  sae::SaeEncoder encoder;
  boost::BoostEnsemble ensemble;
  std::size_t window_len = 0;
  // Targets are multiplied by rate_scale before boosting; forecasts divide it out.
  double rate_scale = 1.0;

  std::vector<std::size_t> sample_counts;  // training samples per index
  std::vector<features::DataStamp> fit_ranges;
  double sae_initial_loss = 0;
  double sae_final_loss = 0;
  std::vector<double> sae_epoch_loss;
  std::vector<double> fitted_rates;  // in-sample forecasts, index order then row order

  std::size_t index_of(std::string_view name) const;
  std::vector<StatisticStamp> stamps() const;
};

// fit_rows[i] holds index i's indicator rows inside the fit range; every
// matrix must share one column schema.
FittedPipeline fit_pipeline(std::span<const features::FeatureMatrix> fit_rows, std::span<const std::string> index_names,
                            const PipelineConfig& cfg);

// Normalized and SAE-encoded rows of an indicator matrix for index `index`.
features::FeatureMatrix encode_rows(const FittedPipeline& p, std::size_t index, const features::FeatureMatrix& raw);

// Change-rate forecast for the day after each row in `rows` of `raw`.
std::vector<double> predict_rates(const FittedPipeline& p, std::size_t index, const features::FeatureMatrix& raw,
                                  std::span<const std::size_t> rows);

// rate = ensemble(x) / rate_scale.
double forecast_rate(const FittedPipeline& p, const nd::Tensor& window);

}  // namespace cgb::eval
