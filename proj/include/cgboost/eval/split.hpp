#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "cgboost/features/series.hpp"

namespace cgb::eval {

enum class SplitUnit { trading_days, calendar_months };

std::string_view split_unit_name(SplitUnit unit);
SplitUnit parse_split_unit(std::string_view name);

// Rolling walk-forward geometry. Lengths count rows (trading days) or
// calendar months depending on unit.
struct SplitConfig {
  SplitUnit unit = SplitUnit::trading_days;
  std::size_t train = 504;
  std::size_t validate = 63;
  std::size_t test = 63;
  std::size_t stride = 63;
  std::size_t windows_per_year = 4;

  static SplitConfig calendar() { return {SplitUnit::calendar_months, 24, 3, 3, 3, 4}; }
  void validate_config() const;
};

// Row ranges are [begin, end) into the dates the plan was built from.
struct SplitWindow {
  std::size_t number = 0;
  std::size_t year = 0;  // number / windows_per_year
  std::size_t train_begin = 0;
  std::size_t validate_begin = 0;
  std::size_t test_begin = 0;
  std::size_t test_end = 0;
  features::Date train_first;
  features::Date validate_first;
  features::Date test_first;
  features::Date test_last;
};

struct SplitPlan {
  SplitConfig config;
  std::vector<SplitWindow> windows;

  std::size_t years() const { return windows.empty() ? 0 : windows.back().year + 1; }
};

// Maximal sequence of windows over strictly increasing dates. Throws DataError
// naming the required minimum span when not even one window fits.
SplitPlan build_split_plan(std::span<const features::Date> dates, const SplitConfig& cfg);

}  // namespace cgb::eval
