#include "cgboost/features/series.hpp"

#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "cgboost/error.hpp"

namespace cgb::features {

Date parse_date(std::string_view text) {
  auto fail = [&] { return DataError(fmt::format("invalid ISO-8601 date '{}'", text)); };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw fail();
  auto field = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, v);
    if (ec != std::errc{} || ptr != text.data() + pos + len) throw fail();
    return v;
  };
  const Date d{std::chrono::year{field(0, 4)}, std::chrono::month{static_cast<unsigned>(field(5, 2))},
               std::chrono::day{static_cast<unsigned>(field(8, 2))}};
  if (!d.ok()) throw fail();
  return d;
}

std::string format_date(Date date) {
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(date.year()), static_cast<unsigned>(date.month()),
                     static_cast<unsigned>(date.day()));
}

void SeriesFrame::validate() const {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SeriesRow& r = rows[i];
    const std::string when = format_date(r.date);
    if (i > 0 && !(rows[i - 1].date < r.date)) {
      throw DataError(fmt::format("{}: dates must be strictly increasing ({} follows {})", index_name, when,
                                  format_date(rows[i - 1].date)));
    }
    for (double v : {r.open, r.high, r.low, r.close, r.volume}) {
      if (!std::isfinite(v)) throw DataError(fmt::format("{}: non-finite value on {}", index_name, when));
    }
    if (!(r.open > 0 && r.high > 0 && r.low > 0 && r.close > 0)) {
      throw DataError(fmt::format("{}: non-positive price on {}", index_name, when));
    }
    if (r.high < std::max(r.open, r.close)) {
      throw DataError(fmt::format("{}: high below open/close on {}", index_name, when));
    }
    if (r.low > std::min(r.open, r.close)) {
      throw DataError(fmt::format("{}: low above open/close on {}", index_name, when));
    }
    if (r.volume < 0) throw DataError(fmt::format("{}: negative volume on {}", index_name, when));
    if (r.macro.size() != macro_names.size()) {
      throw DataError(fmt::format("{}: {} macro values on {}, expected {}", index_name, r.macro.size(), when,
                                  macro_names.size()));
    }
    for (double v : r.macro) {
      if (!std::isfinite(v)) throw DataError(fmt::format("{}: non-finite macro value on {}", index_name, when));
    }
  }
}

double FeatureMatrix::target_rate(std::size_t t) const {
  if (!has_target(t)) throw UsageError(fmt::format("row {} has no next-day close", t));
  return (close[t + 1] - close[t]) / close[t];
}

FeatureMatrix FeatureMatrix::slice(std::size_t begin, std::size_t end) const {
  if (begin >= end || end > rows()) {
    throw UsageError(fmt::format("feature slice [{}, {}) out of range for {} rows", begin, end, rows()));
  }
  FeatureMatrix out;
  out.columns = columns;
  out.dates.assign(dates.begin() + begin, dates.begin() + end);
  out.close.assign(close.begin() + begin, close.begin() + end);
  const std::size_t d = cols();
  std::vector<double> values(features.values().begin() + begin * d, features.values().begin() + end * d);
  out.features = nd::Tensor({end - begin, d}, std::move(values));
  return out;
}

FeatureMatrix FeatureMatrix::with_features(std::vector<std::string> names, nd::Tensor values) const {
  if (values.rank() != 2 || values.dim(0) != rows() || values.dim(1) != names.size()) {
    throw ShapeError(fmt::format("feature block {} does not fit {} rows x {} columns",
                                 nd::shape_string(values.shape()), rows(), names.size()));
  }
  FeatureMatrix out;
  out.dates = dates;
  out.close = close;
  out.columns = std::move(names);
  out.features = std::move(values);
  return out;
}

}  // namespace cgb::features
