#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "cgboost/ndcore/tensor.hpp"

namespace cgb::features {

using Date = std::chrono::year_month_day;

// ISO-8601 calendar date (YYYY-MM-DD). Throws DataError on malformed input.
Date parse_date(std::string_view text);
std::string format_date(Date date);

struct SeriesRow {
  Date date;
  double open = 0;
  double high = 0;
  double low = 0;
  double close = 0;
  double volume = 0;
  std::vector<double> macro;
};

// Daily market data for one index.
struct SeriesFrame {
  std::string index_name;
  std::vector<std::string> macro_names;
  std::vector<SeriesRow> rows;

  // Strictly increasing dates; positive prices with low <= min(open, close)
  // and high >= max(open, close); non-negative volume; one macro value per
  // macro column. Throws DataError naming the offending date.
  void validate() const;
};

// First and last date of the rows that fed a fitted statistic.
struct DataStamp {
  Date first;
  Date last;
};

// Per-day engineered features. Row t's regression target is the next day's
// close change rate, so the final row never has a target.
struct FeatureMatrix {
  std::vector<Date> dates;
  std::vector<std::string> columns;
  nd::Tensor features;  // [rows x columns]
  std::vector<double> close;

  std::size_t rows() const { return dates.size(); }
  std::size_t cols() const { return columns.size(); }
  bool has_target(std::size_t t) const { return t + 1 < rows(); }
  // (close[t+1] - close[t]) / close[t]
  double target_rate(std::size_t t) const;

  // Rows [begin, end).
  FeatureMatrix slice(std::size_t begin, std::size_t end) const;
  // Same dates and closes with a different feature block.
  FeatureMatrix with_features(std::vector<std::string> names, nd::Tensor values) const;
};

}  // namespace cgb::features
