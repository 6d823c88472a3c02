#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cgboost/features/series.hpp"

namespace cgb::features {

struct ColumnScaling {
  double clip_low = 0;
  double clip_high = 0;
  double shift = 0;
  double scale = 1;
};

// Linear-interpolated empirical quantile of an unsorted sample, q in [0, 1].
double empirical_quantile(std::vector<double> sample, double q);

// Per-column clip-then-affine map fitted on training rows: values are clipped
// to the [q_low, q_high] training quantiles and rescaled so the clipped
// training data spans exactly [0, 1].
class Normalizer {
 public:
  Normalizer() = default;

  static Normalizer fit(const FeatureMatrix& train_rows, double q_low, double q_high);
  // Rebuilds a fitted normalizer from stored parameters (model loading).
  static Normalizer from_parameters(std::vector<ColumnScaling> columns, std::optional<DataStamp> stamp);

  bool fitted() const { return fitted_; }
  const std::vector<ColumnScaling>& columns() const { return columns_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  const std::optional<DataStamp>& stamp() const { return stamp_; }

  FeatureMatrix apply(const FeatureMatrix& rows) const;
  double transform(std::size_t column, double value) const;
  // Inverse of the affine part; exact only for values inside the clip range.
  double inverse(std::size_t column, double normalized) const;

 private:
  void require_fitted() const;

  bool fitted_ = false;
  std::vector<ColumnScaling> columns_;
  std::vector<std::string> warnings_;
  std::optional<DataStamp> stamp_;
};

}  // namespace cgb::features
