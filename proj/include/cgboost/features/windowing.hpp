#pragma once

#include <cstddef>
#include <vector>

#include "cgboost/features/series.hpp"
#include "cgboost/ndcore/tensor.hpp"

namespace cgb::features {

struct Sample {
  nd::Tensor x;  // [features x window_len], oldest day first
  double y_rate = 0;
  double close_today = 0;
  Date date;
  std::size_t row = 0;  // index of the sample's last day in the matrix
};

// Input window ending at row t: rows t-L+1..t as a channels-by-time tensor.
nd::Tensor window_at(const FeatureMatrix& fm, std::size_t t, std::size_t window_len);

// One sample per row t >= L-1 that has a next-day target.
std::vector<Sample> window_samples(const FeatureMatrix& fm, std::size_t window_len);

// Like window_samples but also emits the final row (y_rate left at 0), for
// forecasting beyond the last known close.
std::vector<Sample> window_inputs(const FeatureMatrix& fm, std::size_t window_len);

}  // namespace cgb::features
