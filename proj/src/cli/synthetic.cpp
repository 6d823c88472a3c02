#include "cgboost/cli/synthetic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "cgboost/error.hpp"
#include "cgboost/features/indicators.hpp"
#include "cgboost/ndcore/rng.hpp"

namespace cgb::cli {

std::string_view regime_name(Regime regime) {
  switch (regime) {
    case Regime::sinusoid: return "sinusoid";
    case Regime::gbm: return "gbm";
    case Regime::trend_noise: return "trend_noise";
  }
  return "?";
}

Regime parse_regime(std::string_view name) {
  if (name == "sinusoid") return Regime::sinusoid;
  if (name == "gbm") return Regime::gbm;
  if (name == "trend_noise") return Regime::trend_noise;
  throw ConfigError(fmt::format("unknown regime '{}' (expected sinusoid, gbm or trend_noise)", name));
}

features::SeriesFrame generate_synthetic(const SyntheticSpec& spec) {
  if (spec.days < features::kMinIndicatorRows) {
    throw ConfigError(fmt::format("synthetic series needs at least {} days, got {}", features::kMinIndicatorRows,
                                  spec.days));
  }
  if (!(spec.start_price > 0.0) || !std::isfinite(spec.start_price)) {
    throw ConfigError("synthetic start_price must be positive");
  }
  if (!(spec.noise >= 0.0 && spec.noise < 0.1)) throw ConfigError("synthetic noise must lie in [0, 0.1)");
  if (!spec.start.ok()) throw ConfigError("synthetic start date is invalid");

  nd::Rng rng(spec.seed);
  const double two_pi = 2.0 * std::numbers::pi;
  const double phase = rng.uniform(0.0, two_pi);
  const double dt = 1.0 / 252.0;

  std::vector<double> close(spec.days);
  double log_price = std::log(spec.start_price);
  for (std::size_t t = 0; t < spec.days; ++t) {
    const double td = static_cast<double>(t);
    const double shock = 1.0 + spec.noise * rng.normal();
    switch (spec.regime) {
      case Regime::sinusoid:
        close[t] = spec.start_price * (1.0 + 0.12 * std::sin(two_pi * td / 63.0) + 0.04 * std::sin(two_pi * td / 21.0 + phase)) *
                   shock;
        break;
      case Regime::gbm:
        if (t > 0) log_price += (0.05 - 0.5 * 0.04) * dt + 0.2 * std::sqrt(dt) * rng.normal();
        close[t] = std::exp(log_price);
        break;
      case Regime::trend_noise:
        close[t] = spec.start_price * std::exp(0.1 * td * dt) * shock;
        break;
    }
  }

  features::SeriesFrame frame;
  frame.index_name = spec.index_name;
  frame.macro_names = {"macro_rate", "macro_fx"};
  std::chrono::sys_days day{spec.start};
  double m0 = 3.0, m1 = 6.5, v0 = 0.0, v1 = 0.0;
  for (std::size_t t = 0; t < spec.days; ++t) {
    while (std::chrono::weekday{day}.c_encoding() == 0 || std::chrono::weekday{day}.c_encoding() == 6) {
      day += std::chrono::days{1};
    }
    features::SeriesRow row;
    row.date = std::chrono::year_month_day{day};
    row.close = close[t];
    const double prev = t == 0 ? close[0] : close[t - 1];
    row.open = prev * (1.0 + 0.002 * rng.normal());
    const double top = std::max(row.open, row.close), bottom = std::min(row.open, row.close);
    row.high = top * (1.0 + 0.004 * std::abs(rng.normal()));
    row.low = bottom * (1.0 - 0.004 * std::abs(rng.normal()));
    row.volume = std::round(1e6 * std::exp(0.3 * rng.normal()));
    // Smoothed random walks: the step itself follows an AR(1) process.
    v0 = 0.9 * v0 + 0.002 * rng.normal();
    v1 = 0.9 * v1 + 0.005 * rng.normal();
    m0 += v0;
    m1 += v1;
    row.macro = {m0, m1};
    frame.rows.push_back(std::move(row));
    day += std::chrono::days{1};
  }
  frame.validate();
  return frame;
}

}  // namespace cgb::cli
