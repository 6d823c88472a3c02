#pragma once

#include <span>

namespace cgb::eval {

// (1/N) sum |(a_t - p_t) / a_t|. Throws DomainError on a zero actual value.
double mape(std::span<const double> actual, std::span<const double> pred);

// Pearson correlation. Throws DomainError when either series is constant
// (R undefined) or has fewer than two values.
double correlation(std::span<const double> actual, std::span<const double> pred);

// RMS(a - p) / (RMS(a) + RMS(p)), in [0, 1]. Throws DomainError when both
// series are all zero.
double theil_u(std::span<const double> actual, std::span<const double> pred);

}  // namespace cgb::eval
