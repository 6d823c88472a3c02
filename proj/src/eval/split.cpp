#include "cgboost/eval/split.hpp"

#include <algorithm>
#include <chrono>

#include <fmt/format.h>

#include "cgboost/error.hpp"

namespace cgb::eval {
namespace {

using features::Date;

Date add_months(Date d, std::size_t n) {
  const std::chrono::year_month ym =
      std::chrono::year_month{d.year(), d.month()} + std::chrono::months{static_cast<int>(n)};
  const std::chrono::day last = (ym.year() / ym.month() / std::chrono::last).day();
  return ym.year() / ym.month() / std::min(d.day(), last);
}

std::size_t first_at_or_after(std::span<const Date> dates, Date d) {
  return static_cast<std::size_t>(std::lower_bound(dates.begin(), dates.end(), d) - dates.begin());
}

void fill_dates(SplitWindow& w, std::span<const Date> dates) {
  w.train_first = dates[w.train_begin];
  w.validate_first = dates[w.validate_begin];
  w.test_first = dates[w.test_begin];
  w.test_last = dates[w.test_end - 1];
}

SplitPlan trading_day_plan(std::span<const Date> dates, const SplitConfig& cfg) {
  const std::size_t need = cfg.train + cfg.validate + cfg.test;
  if (dates.size() < need) {
    throw DataError(fmt::format("split plan needs at least {} trading days ({} train + {} validate + {} test), got {}",
                                need, cfg.train, cfg.validate, cfg.test, dates.size()));
  }
  SplitPlan plan{.config = cfg, .windows = {}};
  for (std::size_t k = 0, start = 0; start + need <= dates.size(); ++k, start += cfg.stride) {
    SplitWindow w;
    w.number = k;
    w.year = k / cfg.windows_per_year;
    w.train_begin = start;
    w.validate_begin = start + cfg.train;
    w.test_begin = w.validate_begin + cfg.validate;
    w.test_end = w.test_begin + cfg.test;
    fill_dates(w, dates);
    plan.windows.push_back(w);
  }
  return plan;
}

// A calendar window counts as complete when the data reaches within a week of
// its test period's end, which absorbs weekends and holidays.
SplitPlan calendar_plan(std::span<const Date> dates, const SplitConfig& cfg) {
  SplitPlan plan{.config = cfg, .windows = {}};
  const Date origin = dates.front();
  const auto last = std::chrono::sys_days{dates.back()};
  for (std::size_t k = 0;; ++k) {
    const Date start = add_months(origin, k * cfg.stride);
    const Date vb = add_months(start, cfg.train);
    const Date tb = add_months(vb, cfg.validate);
    const Date te = add_months(tb, cfg.test);
    if (last + std::chrono::days{7} < std::chrono::sys_days{te}) break;
    SplitWindow w;
    w.number = k;
    w.year = k / cfg.windows_per_year;
    w.train_begin = first_at_or_after(dates, start);
    w.validate_begin = first_at_or_after(dates, vb);
    w.test_begin = first_at_or_after(dates, tb);
    w.test_end = first_at_or_after(dates, te);
    if (w.train_begin == w.validate_begin || w.validate_begin == w.test_begin || w.test_begin == w.test_end) {
      throw DataError(fmt::format("split window {} starting {} has an empty segment", k, features::format_date(start)));
    }
    fill_dates(w, dates);
    plan.windows.push_back(w);
  }
  if (plan.windows.empty()) {
    throw DataError(fmt::format("split plan needs at least {} months ({} train + {} validate + {} test) of data from {}",
                                cfg.train + cfg.validate + cfg.test, cfg.train, cfg.validate, cfg.test,
                                features::format_date(origin)));
  }
  return plan;
}

}  // namespace

std::string_view split_unit_name(SplitUnit unit) {
  return unit == SplitUnit::trading_days ? "trading_days" : "calendar_months";
}

SplitUnit parse_split_unit(std::string_view name) {
  if (name == "trading_days") return SplitUnit::trading_days;
  if (name == "calendar_months") return SplitUnit::calendar_months;
  throw ConfigError(fmt::format("unknown split unit '{}' (expected trading_days or calendar_months)", name));
}

void SplitConfig::validate_config() const {
  if (train == 0 || validate == 0 || test == 0 || stride == 0) {
    throw ConfigError("split train, validate, test and stride must all be positive");
  }
  if (stride < test) throw ConfigError(fmt::format("split stride {} is shorter than the test length {}", stride, test));
  if (windows_per_year == 0) throw ConfigError("split windows_per_year must be positive");
}

SplitPlan build_split_plan(std::span<const Date> dates, const SplitConfig& cfg) {
  cfg.validate_config();
  if (dates.empty()) throw DataError("split plan needs dates");
  for (std::size_t i = 1; i < dates.size(); ++i) {
    if (!(dates[i - 1] < dates[i])) throw DataError("split plan dates must be strictly increasing");
  }
  return cfg.unit == SplitUnit::trading_days ? trading_day_plan(dates, cfg) : calendar_plan(dates, cfg);
}

}  // namespace cgb::eval
