#include "cgboost/eval/backtest.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>

#include "cgboost/error.hpp"
#include "cgboost/eval/metrics.hpp"
#include "cgboost/features/indicators.hpp"

namespace cgb::eval {
namespace {

using features::Date;
using features::FeatureMatrix;

class PipelineForecaster final : public Forecaster {
 public:
  explicit PipelineForecaster(PipelineConfig cfg) : cfg_(std::move(cfg)) {}

  void fit(std::span<const FeatureMatrix> fit_rows, std::span<const std::string> index_names) override {
    fitted_ = fit_pipeline(fit_rows, index_names, cfg_);
  }

  std::vector<double> predict_rates(std::size_t index, const FeatureMatrix& full,
                                    std::span<const std::size_t> rows) const override {
    return eval::predict_rates(fitted_, index, full, rows);
  }

  std::vector<StatisticStamp> stamps() const override { return fitted_.stamps(); }

 private:
  PipelineConfig cfg_;
  FittedPipeline fitted_;
};

std::size_t lower_row(const FeatureMatrix& fm, Date d) {
  return static_cast<std::size_t>(std::lower_bound(fm.dates.begin(), fm.dates.end(), d) - fm.dates.begin());
}

std::size_t upper_row(const FeatureMatrix& fm, Date d) {
  return static_cast<std::size_t>(std::upper_bound(fm.dates.begin(), fm.dates.end(), d) - fm.dates.begin());
}

struct WindowRows {
  std::size_t fit_begin = 0;
  std::size_t fit_end = 0;
  std::vector<std::size_t> inputs;  // rows whose next day is a test target
};

WindowRows rows_for(const FeatureMatrix& fm, const SplitWindow& w, std::size_t window_len, const std::string& name) {
  WindowRows out;
  out.fit_begin = lower_row(fm, w.train_first);
  out.fit_end = lower_row(fm, w.test_first);
  const std::size_t target_begin = out.fit_end, target_end = upper_row(fm, w.test_last);
  for (std::size_t r = std::max<std::size_t>(target_begin, 1); r < target_end; ++r) {
    if (r >= window_len) out.inputs.push_back(r - 1);
  }
  if (out.fit_end <= out.fit_begin || out.inputs.empty()) {
    throw DataError(fmt::format("{} has no usable rows for window {} (test {} to {})", name, w.number + 1,
                                features::format_date(w.test_first), features::format_date(w.test_last)));
  }
  return out;
}

std::optional<double> try_correlation(std::span<const double> a, std::span<const double> p) {
  try {
    return correlation(a, p);
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

}  // namespace

ForecasterFactory pipeline_forecaster(const PipelineConfig& cfg) {
  return [cfg] { return std::make_unique<PipelineForecaster>(cfg); };
}

MetricSet compute_metrics(std::span<const double> actual, std::span<const double> pred) {
  return {mape(actual, pred), try_correlation(actual, pred), theil_u(actual, pred)};
}

MetricSet average_metrics(std::span<const MetricSet> sets) {
  if (sets.empty()) throw UsageError("average_metrics of no values");
  MetricSet out;
  double r_sum = 0;
  std::size_t r_count = 0;
  for (const auto& s : sets) {
    out.mape += s.mape;
    out.theil_u += s.theil_u;
    if (s.r) {
      r_sum += *s.r;
      ++r_count;
    }
  }
  out.mape /= static_cast<double>(sets.size());
  out.theil_u /= static_cast<double>(sets.size());
  if (r_count) out.r = r_sum / static_cast<double>(r_count);
  return out;
}

bool EvalReport::audit_passed() const {
  return !audit.empty() && std::all_of(audit.begin(), audit.end(), [](const AuditEntry& a) { return a.ok(); });
}

EvalReport run_backtest(std::span<const IndexSeries> series, const PipelineConfig& cfg,
                        const ForecasterFactory& factory) {
  cfg.validate();
  if (series.empty()) throw UsageError("run_backtest needs at least one index");
  for (std::size_t i = 0; i < series.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (series[i].name == series[j].name) throw DataError(fmt::format("duplicate index name '{}'", series[i].name));

  EvalReport report;
  report.mode = cfg.mode;
  for (const auto& s : series) report.indexes.push_back(s.name);
  const std::size_t L = cfg.features.window_len;

  // One group per fitted model: every index in pooled mode, a single index otherwise.
  std::vector<std::vector<std::size_t>> groups;
  if (cfg.mode == PoolMode::pooled) {
    groups.emplace_back();
    for (std::size_t i = 0; i < series.size(); ++i) groups.back().push_back(i);
  } else {
    for (std::size_t i = 0; i < series.size(); ++i) groups.push_back({i});
  }

  for (const auto& group : groups) {
    const IndexSeries& lead = series[group.front()];
    const SplitPlan plan = [&] {
      try {
        return build_split_plan(lead.indicators.dates, cfg.split);
      } catch (const Error& e) {
        rethrow_with_context(e, lead.name);
      }
    }();
    for (const SplitWindow& w : plan.windows) {
      const std::string where = fmt::format("{} window {}", lead.name, w.number + 1);
      try {
        std::vector<WindowRows> rows;
        std::vector<FeatureMatrix> fit_rows;
        std::vector<std::string> names;
        for (std::size_t i : group) {
          rows.push_back(rows_for(series[i].indicators, w, L, series[i].name));
          fit_rows.push_back(series[i].indicators.slice(rows.back().fit_begin, rows.back().fit_end));
          names.push_back(series[i].name);
        }
        std::unique_ptr<Forecaster> model = factory();
        model->fit(fit_rows, names);
        const auto stamps = model->stamps();
        for (std::size_t k = 0; k < group.size(); ++k) {
          const FeatureMatrix& fm = series[group[k]].indicators;
          const std::vector<double> rates = model->predict_rates(k, fm, rows[k].inputs);
          WindowSeries ws{.index = names[k], .window = w.number + 1, .year = w.year + 1};
          for (std::size_t j = 0; j < rates.size(); ++j) {
            const std::size_t t = rows[k].inputs[j];
            ws.dates.push_back(fm.dates[t + 1]);
            ws.close_today.push_back(fm.close[t]);
            ws.actual.push_back(fm.close[t + 1]);
            ws.predicted.push_back(fm.close[t] * (1.0 + rates[j]));
            ws.naive.push_back(fm.close[t]);
          }
          report.windows.push_back(std::move(ws));
          for (const auto& st : stamps) {
            report.audit.push_back({.index = names[k],
                                    .window = w.number + 1,
                                    .statistic = st.statistic,
                                    .scope = st.index,
                                    .range = st.range,
                                    .test_start = fm.dates[rows[k].inputs.front() + 1]});
          }
        }
      } catch (const Error& e) {
        rethrow_with_context(e, where);
      }
    }
  }

  // Yearly metrics over the concatenated windows of each (index, year).
  std::map<std::pair<std::size_t, std::size_t>, std::vector<const WindowSeries*>> by_year;
  for (const auto& ws : report.windows) {
    const std::size_t idx = static_cast<std::size_t>(
        std::find(report.indexes.begin(), report.indexes.end(), ws.index) - report.indexes.begin());
    by_year[{idx, ws.year}].push_back(&ws);
  }
  for (const auto& [key, parts] : by_year) {
    std::vector<double> actual, predicted, naive;
    for (const WindowSeries* ws : parts) {
      actual.insert(actual.end(), ws->actual.begin(), ws->actual.end());
      predicted.insert(predicted.end(), ws->predicted.begin(), ws->predicted.end());
      naive.insert(naive.end(), ws->naive.begin(), ws->naive.end());
    }
    report.years.push_back({.index = report.indexes[key.first],
                            .year = key.second,
                            .first = parts.front()->dates.front(),
                            .last = parts.back()->dates.back(),
                            .windows = parts.size(),
                            .points = actual.size(),
                            .model = compute_metrics(actual, predicted),
                            .naive = compute_metrics(actual, naive)});
  }
  for (const auto& name : report.indexes) {
    std::vector<MetricSet> model, naive;
    for (const auto& y : report.years) {
      if (y.index != name) continue;
      model.push_back(y.model);
      naive.push_back(y.naive);
    }
    if (model.empty()) continue;
    report.averages.push_back(
        {.index = name, .years = model.size(), .model = average_metrics(model), .naive = average_metrics(naive)});
  }
  return report;
}

EvalReport run_backtest(std::span<const features::SeriesFrame> frames, const PipelineConfig& cfg) {
  std::vector<IndexSeries> series;
  for (const auto& f : frames) {
    try {
      series.push_back({f.index_name, features::compute_indicators(f)});
    } catch (const Error& e) {
      rethrow_with_context(e, f.index_name);
    }
  }
  return run_backtest(series, cfg, pipeline_forecaster(cfg));
}

}  // namespace cgb::eval
