#include "cgboost/eval/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "cgboost/error.hpp"
#include "cgboost/features/windowing.hpp"
#include "cgboost/ndcore/rng.hpp"

namespace cgb::eval {

std::string_view pool_mode_name(PoolMode mode) { return mode == PoolMode::per_index ? "per_index" : "pooled"; }

PoolMode parse_pool_mode(std::string_view name) {
  if (name == "per_index") return PoolMode::per_index;
  if (name == "pooled") return PoolMode::pooled;
  throw ConfigError(fmt::format("unknown mode '{}' (expected per_index or pooled)", name));
}

void PipelineConfig::validate() const {
  if (threads == 0) throw ConfigError("threads must be at least 1");
  if (features.window_len == 0) throw ConfigError("features.window_len must be at least 1");
  if (!(features.clip_low >= 0.0 && features.clip_low < features.clip_high && features.clip_high <= 1.0)) {
    throw ConfigError(fmt::format("clip quantiles must satisfy 0 <= low < high <= 1, got ({}, {})", features.clip_low,
                                  features.clip_high));
  }
  if (sae.arch.hidden == 0) throw ConfigError("sae.hidden must be at least 1");
  if (sae.arch.encoder == sae::EncoderArch::residual_conv) {
    if (sae.arch.conv_channels == 0) throw ConfigError("sae.conv_channels must be at least 1");
    if (sae.arch.kernel_width % 2 == 0) throw ConfigError("sae.kernel_width must be odd");
  }
  if (!(sae.rho > 0.0 && sae.rho < 1.0)) throw ConfigError(fmt::format("sae.rho must lie in (0, 1), got {}", sae.rho));
  if (!(sae.beta >= 0.0) || !std::isfinite(sae.beta)) {
    throw ConfigError(fmt::format("sae.beta must be finite and >= 0, got {}", sae.beta));
  }
  sae.sgd.validate();
  resolved_boost().validate();
  split.validate_config();
}

boost::BoostConfig PipelineConfig::resolved_boost() const {
  boost::BoostConfig b = boost;
  b.base.input_channels = sae.arch.hidden;
  b.base.window_len = features.window_len;
  b.sgd.seed = nd::mix_seed(seed, 12);
  return b;
}

nd::SgdConfig PipelineConfig::resolved_sae_sgd() const {
  nd::SgdConfig s = sae.sgd;
  s.seed = nd::mix_seed(seed, 11);
  return s;
}

std::size_t FittedPipeline::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < index_names.size(); ++i)
    if (index_names[i] == name) return i;
  throw DataError(fmt::format("model was not trained on index '{}' (trained: {})", name, fmt::join(index_names, ", ")));
}

std::vector<StatisticStamp> FittedPipeline::stamps() const {
  std::vector<StatisticStamp> out;
  for (std::size_t i = 0; i < index_names.size(); ++i) {
    if (normalizers[i].stamp()) out.push_back({"normalizer", index_names[i], *normalizers[i].stamp()});
  }
  if (fit_ranges.empty()) return out;
  // The encoder and ensemble saw every index's fit rows.
  features::DataStamp all = fit_ranges.front();
  for (const auto& r : fit_ranges) {
    all.first = std::min(all.first, r.first);
    all.last = std::max(all.last, r.last);
  }
  const std::string who = fmt::format("{}", fmt::join(index_names, "+"));
  out.push_back({"sae", who, all});
  out.push_back({"ensemble", who, all});
  return out;
}

namespace {

void require_schema(const std::vector<std::string>& expected, const std::vector<std::string>& got,
                    std::string_view index) {
  if (expected == got) return;
  std::vector<std::string> missing, extra;
  for (const auto& c : expected)
    if (std::find(got.begin(), got.end(), c) == got.end()) missing.push_back(c);
  for (const auto& c : got)
    if (std::find(expected.begin(), expected.end(), c) == expected.end()) extra.push_back(c);
  throw DataError(fmt::format("feature schema mismatch for '{}': missing [{}], extra [{}]{}", index,
                              fmt::join(missing, ", "), fmt::join(extra, ", "),
                              missing.empty() && extra.empty() ? " (column order differs)" : ""));
}

std::vector<nd::Tensor> row_vectors(const features::FeatureMatrix& fm) {
  std::vector<nd::Tensor> out;
  out.reserve(fm.rows());
  for (std::size_t r = 0; r < fm.rows(); ++r) {
    nd::Tensor v({fm.cols()});
    for (std::size_t c = 0; c < fm.cols(); ++c) v[c] = fm.features.at(r, c);
    out.push_back(std::move(v));
  }
  return out;
}

features::FeatureMatrix encode_normalized(const sae::SaeEncoder& encoder, const features::FeatureMatrix& normalized) {
  const std::size_t h = encoder.hidden();
  nd::Tensor codes({normalized.rows(), h});
  const std::vector<nd::Tensor> rows = row_vectors(normalized);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const nd::Tensor a = sae::encode(encoder, rows[r]);
    for (std::size_t j = 0; j < h; ++j) codes.at(r, j) = a[j];
  }
  std::vector<std::string> names;
  for (std::size_t j = 0; j < h; ++j) names.push_back(fmt::format("sae{}", j));
  return normalized.with_features(std::move(names), std::move(codes));
}

}  // namespace

FittedPipeline fit_pipeline(std::span<const features::FeatureMatrix> fit_rows, std::span<const std::string> index_names,
                            const PipelineConfig& cfg) {
  cfg.validate();
  if (fit_rows.empty()) throw UsageError("fit_pipeline needs at least one index");
  if (fit_rows.size() != index_names.size()) throw UsageError("fit_pipeline: one name per index required");

  FittedPipeline p;
  p.index_names.assign(index_names.begin(), index_names.end());
  p.feature_columns = fit_rows.front().columns;
  p.window_len = cfg.features.window_len;

  std::vector<features::FeatureMatrix> normalized;
  std::vector<nd::Tensor> sae_data;
  for (std::size_t i = 0; i < fit_rows.size(); ++i) {
    const features::FeatureMatrix& fm = fit_rows[i];
    require_schema(p.feature_columns, fm.columns, index_names[i]);
    if (fm.rows() <= p.window_len) {
      throw DataError(fmt::format("{}: {} fit rows cannot form a window of {} with a target", index_names[i],
                                  fm.rows(), p.window_len));
    }
    p.normalizers.push_back(features::Normalizer::fit(fm, cfg.features.clip_low, cfg.features.clip_high));
    p.fit_ranges.push_back({fm.dates.front(), fm.dates.back()});
    normalized.push_back(p.normalizers.back().apply(fm));
    for (auto& v : row_vectors(normalized.back())) sae_data.push_back(std::move(v));
  }

  sae::SaeTrainResult sae_fit = [&] {
    try {
      return sae::train_sae(sae_data, cfg.sae.arch, cfg.resolved_sae_sgd(), cfg.sae.rho, cfg.sae.beta);
    } catch (const Error& e) {
      rethrow_with_context(e, "sae stage");
    }
  }();
  p.encoder = std::move(sae_fit.model.encoder);
  p.sae_initial_loss = sae_fit.initial_loss;
  p.sae_final_loss = sae_fit.final_loss;
  p.sae_epoch_loss = std::move(sae_fit.epoch_loss);

  std::vector<resnet::RegressionSample> samples;
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    const auto windows = features::window_samples(encode_normalized(p.encoder, normalized[i]), p.window_len);
    p.sample_counts.push_back(windows.size());
    for (const auto& s : windows) samples.push_back({s.x, s.y_rate});
  }

  double mean = 0, var = 0;
  for (const auto& s : samples) mean += s.target;
  mean /= static_cast<double>(samples.size());
  for (const auto& s : samples) var += (s.target - mean) * (s.target - mean);
  var /= static_cast<double>(samples.size());
  p.rate_scale = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
  for (auto& s : samples) s.target *= p.rate_scale;

  std::vector<double> fitted;
  try {
    p.ensemble = boost::train_ensemble(samples, cfg.resolved_boost(), &fitted);
  } catch (const Error& e) {
    rethrow_with_context(e, "boost stage");
  }
  p.fitted_rates.reserve(fitted.size());
  for (double f : fitted) p.fitted_rates.push_back(f / p.rate_scale);
  return p;
}

features::FeatureMatrix encode_rows(const FittedPipeline& p, std::size_t index, const features::FeatureMatrix& raw) {
  if (index >= p.normalizers.size()) throw UsageError(fmt::format("no index {} in the fitted pipeline", index));
  require_schema(p.feature_columns, raw.columns, p.index_names[index]);
  return encode_normalized(p.encoder, p.normalizers[index].apply(raw));
}

double forecast_rate(const FittedPipeline& p, const nd::Tensor& window) {
  return boost::predict(p.ensemble, window) / p.rate_scale;
}

std::vector<double> predict_rates(const FittedPipeline& p, std::size_t index, const features::FeatureMatrix& raw,
                                  std::span<const std::size_t> rows) {
  if (rows.empty()) return {};
  const auto [lo, hi] = std::minmax_element(rows.begin(), rows.end());
  if (*lo + 1 < p.window_len || *hi >= raw.rows()) {
    throw UsageError(fmt::format("rows {}..{} cannot end windows of length {} in {} rows", *lo, *hi, p.window_len,
                                 raw.rows()));
  }
  const std::size_t first = *lo + 1 - p.window_len;
  const features::FeatureMatrix encoded = encode_rows(p, index, raw.slice(first, *hi + 1));
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t t : rows) out.push_back(forecast_rate(p, features::window_at(encoded, t - first, p.window_len)));
  return out;
}

}  // namespace cgb::eval
