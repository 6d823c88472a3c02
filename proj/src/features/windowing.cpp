#include "cgboost/features/windowing.hpp"

#include <fmt/format.h>

#include "cgboost/error.hpp"

namespace cgb::features {

namespace {

void check_window(const FeatureMatrix& fm, std::size_t window_len) {
  if (window_len == 0) throw ConfigError("window length must be at least 1");
  if (window_len > fm.rows()) {
    throw DataError(fmt::format("window length {} exceeds the {} available rows", window_len, fm.rows()));
  }
}

std::vector<Sample> make_samples(const FeatureMatrix& fm, std::size_t window_len, bool include_last) {
  check_window(fm, window_len);
  std::vector<Sample> out;
  for (std::size_t t = window_len - 1; t < fm.rows(); ++t) {
    const bool target = fm.has_target(t);
    if (!target && !include_last) continue;
    out.push_back(Sample{window_at(fm, t, window_len), target ? fm.target_rate(t) : 0.0, fm.close[t], fm.dates[t], t});
  }
  return out;
}

}  // namespace

nd::Tensor window_at(const FeatureMatrix& fm, std::size_t t, std::size_t window_len) {
  check_window(fm, window_len);
  if (t + 1 < window_len || t >= fm.rows()) {
    throw UsageError(fmt::format("row {} cannot end a window of length {}", t, window_len));
  }
  const std::size_t d = fm.cols();
  nd::Tensor x({d, window_len});
  const std::size_t first = t + 1 - window_len;
  for (std::size_t j = 0; j < window_len; ++j)
    for (std::size_t c = 0; c < d; ++c) x.at(c, j) = fm.features.at(first + j, c);
  return x;
}

std::vector<Sample> window_samples(const FeatureMatrix& fm, std::size_t window_len) {
  return make_samples(fm, window_len, false);
}

std::vector<Sample> window_inputs(const FeatureMatrix& fm, std::size_t window_len) {
  return make_samples(fm, window_len, true);
}

}  // namespace cgb::features
