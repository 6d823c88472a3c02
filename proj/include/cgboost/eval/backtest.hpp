#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cgboost/eval/pipeline.hpp"
#include "cgboost/eval/split.hpp"
#include "cgboost/features/series.hpp"

namespace cgb::eval {

// Trains on fit-range rows, then forecasts next-day change rates. run_backtest
// creates a fresh forecaster for every window (and every index in per-index
// mode).
class Forecaster {
 public:
  virtual ~Forecaster() = default;

  virtual void fit(std::span<const features::FeatureMatrix> fit_rows, std::span<const std::string> index_names) = 0;
  // `full` is index `index`'s complete indicator matrix; forecasts target the
  // day after each listed row.
  virtual std::vector<double> predict_rates(std::size_t index, const features::FeatureMatrix& full,
                                            std::span<const std::size_t> rows) const = 0;
  // Data ranges behind every fitted statistic.
  virtual std::vector<StatisticStamp> stamps() const = 0;
};

using ForecasterFactory = std::function<std::unique_ptr<Forecaster>()>;

// The SAE + boosted residual CNN pipeline.
ForecasterFactory pipeline_forecaster(const PipelineConfig& cfg);

struct IndexSeries {
  std::string name;
  features::FeatureMatrix indicators;  // compute_indicators output
};

struct MetricSet {
  double mape = 0;
  std::optional<double> r;  // empty when undefined (constant series)
  double theil_u = 0;
};

MetricSet compute_metrics(std::span<const double> actual, std::span<const double> pred);

struct YearResult {
  std::string index;
  std::size_t year = 0;  // 1-based
  features::Date first;  // first and last forecast target dates
  features::Date last;
  std::size_t windows = 0;
  std::size_t points = 0;
  MetricSet model;
  MetricSet naive;  // tomorrow's close = today's close
};

struct IndexAverage {
  std::string index;
  std::size_t years = 0;
  MetricSet model;  // arithmetic mean of the yearly values
  MetricSet naive;
};

struct WindowSeries {
  std::string index;
  std::size_t window = 0;
  std::size_t year = 0;  // 1-based
  std::vector<features::Date> dates;  // target dates
  std::vector<double> close_today;
  std::vector<double> actual;
  std::vector<double> predicted;
  std::vector<double> naive;
};

struct AuditEntry {
  std::string index;
  std::size_t window = 0;
  std::string statistic;
  std::string scope;  // index or indexes the statistic was fitted on
  features::DataStamp range;
  features::Date test_start;

  bool ok() const { return range.last < test_start; }
};

struct EvalReport {
  PoolMode mode = PoolMode::per_index;
  std::vector<std::string> indexes;
  std::vector<YearResult> years;  // ordered by index, then year
  std::vector<IndexAverage> averages;
  std::vector<WindowSeries> windows;
  std::vector<AuditEntry> audit;

  bool audit_passed() const;
};

MetricSet average_metrics(std::span<const MetricSet> sets);

EvalReport run_backtest(std::span<const IndexSeries> series, const PipelineConfig& cfg,
                        const ForecasterFactory& factory);

// Computes indicators for every frame and runs the default pipeline.
EvalReport run_backtest(std::span<const features::SeriesFrame> frames, const PipelineConfig& cfg);

}  // namespace cgb::eval
