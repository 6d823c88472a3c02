#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "cgboost/features/series.hpp"

namespace cgb::cli {

enum class Regime { sinusoid, gbm, trend_noise };

std::string_view regime_name(Regime regime);
Regime parse_regime(std::string_view name);

struct SyntheticSpec {
  std::size_t days = 2340;
  Regime regime = Regime::sinusoid;
  std::uint64_t seed = 0;
  std::string index_name = "SYN";
  features::Date start{std::chrono::year{2008}, std::chrono::July, std::chrono::day{1}};
  double start_price = 1000.0;
  double noise = 0.002;  // relative i.i.d. noise on the close
};

// Business-day (Mon-Fri) series with OHLC consistency by construction and two
// smooth random-walk macro columns. Deterministic per spec.
//   sinusoid:    close = P0 (1 + 0.12 sin(2 pi t / 63) + 0.04 sin(2 pi t / 21 + phase)) (1 + noise e_t)
//   gbm:         log-normal random walk, 5% drift and 20% volatility per year
//   trend_noise: close = P0 exp(0.1 t / 252) (1 + noise e_t)
features::SeriesFrame generate_synthetic(const SyntheticSpec& spec);

}  // namespace cgb::cli
