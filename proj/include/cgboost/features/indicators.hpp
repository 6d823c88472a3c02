#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cgboost/features/series.hpp"

namespace cgb::features {

// Trading days per month for the MTM6/MTM12 momentum lags.
inline constexpr std::size_t kTradingDaysPerMonth = 21;
// Leading rows dropped so every indicator is defined (MTM12 lag).
inline constexpr std::size_t kWarmupRows = 12 * kTradingDaysPerMonth;
inline constexpr std::size_t kMinIndicatorRows = 260;

// Column order produced by compute_indicators (macro columns follow).
std::vector<std::string> indicator_columns();

// Every series below is causal: element t reads inputs at indices <= t only.
// Elements without enough history are NaN.
namespace ind {

std::vector<double> sma(std::span<const double> v, std::size_t n);
// alpha = 2 / (n + 1), seeded with v[0].
std::vector<double> ema(std::span<const double> v, std::size_t n);
// close[t] - close[t - lag]
std::vector<double> momentum(std::span<const double> close, std::size_t lag);
// 100 * (close[t] - close[t - n]) / close[t - n]
std::vector<double> roc(std::span<const double> close, std::size_t n);
// EMA12 - EMA26 of close.
std::vector<double> macd(std::span<const double> close);
// Wilder average of true range; first value is the mean of the first n ranges.
std::vector<double> atr(std::span<const double> high, std::span<const double> low, std::span<const double> close,
                        std::size_t n = 14);
// 100 * EMA_s(EMA_s(close - mid)) / (0.5 * EMA_s(EMA_s(hh - ll))) with an
// n-day high/low range; 0 when the range is flat.
std::vector<double> smi(std::span<const double> high, std::span<const double> low, std::span<const double> close,
                        std::size_t n = 14, std::size_t smooth = 3);
// (tp - SMA_n(tp)) / (0.015 * mean |tp - SMA_n(tp)|), tp = (h + l + c) / 3; 0
// when the mean deviation is zero.
std::vector<double> cci(std::span<const double> high, std::span<const double> low, std::span<const double> close,
                        std::size_t n = 20);
// Rolling n-day sum of volume * (close - open) / (high - low); days with
// high == low contribute 0.
std::vector<double> wvad(std::span<const double> open, std::span<const double> high, std::span<const double> low,
                         std::span<const double> close, std::span<const double> volume, std::size_t n = 24);

}  // namespace ind

// OHLC, MACD, WVAD, ATR, EMA20, BOLL (20-day mid band), MA5, MA10, MTM6,
// MTM12, SMI, ROC, CCI, then macro columns. The first kWarmupRows rows are
// dropped.
FeatureMatrix compute_indicators(const SeriesFrame& frame);

}  // namespace cgb::features
