#include "cgboost/features/normalizer.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "cgboost/error.hpp"

namespace cgb::features {

double empirical_quantile(std::vector<double> sample, double q) {
  if (sample.empty()) throw UsageError("quantile of an empty sample");
  std::sort(sample.begin(), sample.end());
  const double pos = q * static_cast<double>(sample.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= sample.size()) return sample.back();
  const double frac = pos - static_cast<double>(lo);
  return sample[lo] + frac * (sample[lo + 1] - sample[lo]);
}

Normalizer Normalizer::fit(const FeatureMatrix& train_rows, double q_low, double q_high) {
  if (train_rows.rows() < 2) throw UsageError("normalizer needs at least 2 training rows");
  if (!(q_low >= 0.0 && q_low < q_high && q_high <= 1.0)) {
    throw ConfigError(fmt::format("clip quantiles must satisfy 0 <= low < high <= 1, got ({}, {})", q_low, q_high));
  }
  Normalizer n;
  const std::size_t rows = train_rows.rows(), d = train_rows.cols();
  n.columns_.resize(d);
  std::vector<double> col(rows);
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t r = 0; r < rows; ++r) col[r] = train_rows.features.at(r, c);
    ColumnScaling& s = n.columns_[c];
    s.clip_low = empirical_quantile(col, q_low);
    s.clip_high = empirical_quantile(col, q_high);
    if (s.clip_high > s.clip_low) {
      s.shift = s.clip_low;
      s.scale = s.clip_high - s.clip_low;
    } else {
      s.shift = s.clip_low;
      s.scale = 1.0;
      n.warnings_.push_back(fmt::format("column '{}' is constant after clipping; mapped to 0", train_rows.columns[c]));
    }
  }
  n.stamp_ = DataStamp{train_rows.dates.front(), train_rows.dates.back()};
  n.fitted_ = true;
  return n;
}

Normalizer Normalizer::from_parameters(std::vector<ColumnScaling> columns, std::optional<DataStamp> stamp) {
  Normalizer n;
  for (const auto& c : columns) {
    if (!(c.scale > 0.0) || !(c.clip_low <= c.clip_high)) throw DataError("invalid stored normalizer column");
  }
  n.columns_ = std::move(columns);
  n.stamp_ = stamp;
  n.fitted_ = true;
  return n;
}

void Normalizer::require_fitted() const {
  if (!fitted_) throw UsageError("normalizer used before fit");
}

double Normalizer::transform(std::size_t column, double value) const {
  require_fitted();
  const ColumnScaling& s = columns_.at(column);
  return (std::clamp(value, s.clip_low, s.clip_high) - s.shift) / s.scale;
}

double Normalizer::inverse(std::size_t column, double normalized) const {
  require_fitted();
  const ColumnScaling& s = columns_.at(column);
  return normalized * s.scale + s.shift;
}

FeatureMatrix Normalizer::apply(const FeatureMatrix& rows) const {
  require_fitted();
  if (rows.cols() != columns_.size()) {
    throw ShapeError(fmt::format("normalizer fitted on {} columns, got {}", columns_.size(), rows.cols()));
  }
  nd::Tensor out = rows.features;
  const std::size_t d = rows.cols();
  for (std::size_t r = 0; r < rows.rows(); ++r)
    for (std::size_t c = 0; c < d; ++c) out.at(r, c) = transform(c, out.at(r, c));
  return rows.with_features(rows.columns, std::move(out));
}

}  // namespace cgb::features
