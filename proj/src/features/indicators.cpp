#include "cgboost/features/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "cgboost/error.hpp"

namespace cgb::features {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::vector<std::string> indicator_columns() {
  return {"open", "high", "low",  "close", "macd",  "wvad", "atr", "ema20",
          "boll", "ma5",  "ma10", "mtm6",  "mtm12", "smi",  "roc", "cci"};
}

namespace ind {

std::vector<double> sma(std::span<const double> v, std::size_t n) {
  std::vector<double> out(v.size(), kNaN);
  if (n == 0) return out;
  for (std::size_t t = n - 1; t < v.size(); ++t) {
    double s = 0.0;
    for (std::size_t j = t + 1 - n; j <= t; ++j) s += v[j];
    out[t] = s / static_cast<double>(n);
  }
  return out;
}

std::vector<double> ema(std::span<const double> v, std::size_t n) {
  std::vector<double> out(v.size(), kNaN);
  const double alpha = 2.0 / (static_cast<double>(n) + 1.0);
  // Seed at the first defined element so EMA can chain over NaN-led inputs.
  std::size_t t = 0;
  while (t < v.size() && std::isnan(v[t])) ++t;
  if (t == v.size()) return out;
  out[t] = v[t];
  for (++t; t < v.size(); ++t) out[t] = alpha * v[t] + (1.0 - alpha) * out[t - 1];
  return out;
}

std::vector<double> momentum(std::span<const double> close, std::size_t lag) {
  std::vector<double> out(close.size(), kNaN);
  for (std::size_t t = lag; t < close.size(); ++t) out[t] = close[t] - close[t - lag];
  return out;
}

std::vector<double> roc(std::span<const double> close, std::size_t n) {
  std::vector<double> out(close.size(), kNaN);
  for (std::size_t t = n; t < close.size(); ++t) out[t] = 100.0 * (close[t] - close[t - n]) / close[t - n];
  return out;
}

std::vector<double> macd(std::span<const double> close) {
  const auto fast = ema(close, 12);
  const auto slow = ema(close, 26);
  std::vector<double> out(close.size());
  for (std::size_t t = 0; t < close.size(); ++t) out[t] = fast[t] - slow[t];
  return out;
}

std::vector<double> atr(std::span<const double> high, std::span<const double> low, std::span<const double> close,
                        std::size_t n) {
  const std::size_t len = close.size();
  std::vector<double> tr(len), out(len, kNaN);
  for (std::size_t t = 0; t < len; ++t) {
    double range = high[t] - low[t];
    if (t > 0) {
      range = std::max({range, std::abs(high[t] - close[t - 1]), std::abs(low[t] - close[t - 1])});
    }
    tr[t] = range;
  }
  if (len < n || n == 0) return out;
  double seed = 0.0;
  for (std::size_t t = 0; t < n; ++t) seed += tr[t];
  out[n - 1] = seed / static_cast<double>(n);
  for (std::size_t t = n; t < len; ++t) {
    out[t] = (out[t - 1] * static_cast<double>(n - 1) + tr[t]) / static_cast<double>(n);
  }
  return out;
}

std::vector<double> smi(std::span<const double> high, std::span<const double> low, std::span<const double> close,
                        std::size_t n, std::size_t smooth) {
  const std::size_t len = close.size();
  std::vector<double> dist(len, kNaN), range(len, kNaN), out(len, kNaN);
  for (std::size_t t = n - 1; t < len; ++t) {
    const double hh = *std::max_element(high.begin() + (t + 1 - n), high.begin() + t + 1);
    const double ll = *std::min_element(low.begin() + (t + 1 - n), low.begin() + t + 1);
    dist[t] = close[t] - 0.5 * (hh + ll);
    range[t] = hh - ll;
  }
  const auto d2 = ema(ema(dist, smooth), smooth);
  const auto r2 = ema(ema(range, smooth), smooth);
  for (std::size_t t = 0; t < len; ++t) {
    if (std::isnan(d2[t])) continue;
    out[t] = r2[t] > 0.0 ? 100.0 * d2[t] / (0.5 * r2[t]) : 0.0;
  }
  return out;
}

std::vector<double> cci(std::span<const double> high, std::span<const double> low, std::span<const double> close,
                        std::size_t n) {
  const std::size_t len = close.size();
  std::vector<double> tp(len), out(len, kNaN);
  for (std::size_t t = 0; t < len; ++t) tp[t] = (high[t] + low[t] + close[t]) / 3.0;
  const auto mean = sma(tp, n);
  for (std::size_t t = n - 1; t < len; ++t) {
    double dev = 0.0;
    for (std::size_t j = t + 1 - n; j <= t; ++j) dev += std::abs(tp[j] - mean[t]);
    dev /= static_cast<double>(n);
    out[t] = dev > 0.0 ? (tp[t] - mean[t]) / (0.015 * dev) : 0.0;
  }
  return out;
}

std::vector<double> wvad(std::span<const double> open, std::span<const double> high, std::span<const double> low,
                         std::span<const double> close, std::span<const double> volume, std::size_t n) {
  const std::size_t len = close.size();
  std::vector<double> daily(len), out(len, kNaN);
  for (std::size_t t = 0; t < len; ++t) {
    const double range = high[t] - low[t];
    daily[t] = range > 0.0 ? volume[t] * (close[t] - open[t]) / range : 0.0;
  }
  for (std::size_t t = n - 1; t < len; ++t) {
    double s = 0.0;
    for (std::size_t j = t + 1 - n; j <= t; ++j) s += daily[j];
    out[t] = s;
  }
  return out;
}

}  // namespace ind

FeatureMatrix compute_indicators(const SeriesFrame& frame) {
  const std::size_t n = frame.rows.size();
  if (n < kMinIndicatorRows) {
    throw DataError(fmt::format("{}: series has {} rows; indicators need at least {} (MTM12 warm-up)",
                                frame.index_name, n, kMinIndicatorRows));
  }
  std::vector<double> open(n), high(n), low(n), close(n), volume(n);
  for (std::size_t t = 0; t < n; ++t) {
    const SeriesRow& r = frame.rows[t];
    open[t] = r.open;
    high[t] = r.high;
    low[t] = r.low;
    close[t] = r.close;
    volume[t] = r.volume;
  }

  std::vector<std::vector<double>> cols;
  cols.push_back(open);
  cols.push_back(high);
  cols.push_back(low);
  cols.push_back(close);
  cols.push_back(ind::macd(close));
  cols.push_back(ind::wvad(open, high, low, close, volume));
  cols.push_back(ind::atr(high, low, close));
  cols.push_back(ind::ema(close, 20));
  cols.push_back(ind::sma(close, 20));
  cols.push_back(ind::sma(close, 5));
  cols.push_back(ind::sma(close, 10));
  cols.push_back(ind::momentum(close, 6 * kTradingDaysPerMonth));
  cols.push_back(ind::momentum(close, 12 * kTradingDaysPerMonth));
  cols.push_back(ind::smi(high, low, close));
  cols.push_back(ind::roc(close, 12));
  cols.push_back(ind::cci(high, low, close));

  std::vector<std::string> names = indicator_columns();
  for (std::size_t m = 0; m < frame.macro_names.size(); ++m) {
    std::vector<double> col(n);
    for (std::size_t t = 0; t < n; ++t) col[t] = frame.rows[t].macro[m];
    cols.push_back(std::move(col));
    names.push_back(frame.macro_names[m]);
  }

  const std::size_t rows = n - kWarmupRows;
  const std::size_t d = cols.size();
  FeatureMatrix fm;
  fm.columns = std::move(names);
  fm.dates.reserve(rows);
  fm.close.reserve(rows);
  std::vector<double> values(rows * d);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t t = r + kWarmupRows;
    fm.dates.push_back(frame.rows[t].date);
    fm.close.push_back(close[t]);
    for (std::size_t c = 0; c < d; ++c) {
      const double v = cols[c][t];
      if (!std::isfinite(v)) {
        throw DataError(fmt::format("{}: indicator '{}' undefined on {}", frame.index_name, fm.columns[c],
                                    format_date(frame.rows[t].date)));
      }
      values[r * d + c] = v;
    }
  }
  fm.features = nd::Tensor({rows, d}, std::move(values));
  return fm;
}

}  // namespace cgb::features
