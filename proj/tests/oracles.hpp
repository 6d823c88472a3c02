#pragma once

// Independent reference implementations used only by tests. Nothing here
// shares code with the library paths they check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace cgb::test {

// Naive nested-loop "same" convolution: explicit zero-padded copy of the input.
inline std::vector<double> conv1d_bruteforce(const std::vector<double>& input, std::size_t cin, std::size_t len,
                                             const std::vector<double>& kernels, std::size_t cout, std::size_t k,
                                             const std::vector<double>& bias) {
  const std::size_t pad = (k - 1) / 2;
  std::vector<double> padded(cin * (len + 2 * pad), 0.0);
  for (std::size_t c = 0; c < cin; ++c)
    for (std::size_t t = 0; t < len; ++t) padded[c * (len + 2 * pad) + t + pad] = input[c * len + t];
  std::vector<double> out(cout * len, 0.0);
  for (std::size_t o = 0; o < cout; ++o)
    for (std::size_t t = 0; t < len; ++t) {
      double s = bias[o];
      for (std::size_t c = 0; c < cin; ++c)
        for (std::size_t j = 0; j < k; ++j)
          s += kernels[(o * cin + c) * k + j] * padded[c * (len + 2 * pad) + t + j];
      out[o * len + t] = s;
    }
  return out;
}

inline double mape_oracle(const std::vector<double>& a, const std::vector<double>& p) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs((a[i] - p[i]) / a[i]);
  return s / static_cast<double>(a.size());
}

inline double pearson_oracle(const std::vector<double>& a, const std::vector<double>& p) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mp = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mp += p[i];
  }
  ma /= n;
  mp /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (p[i] - mp);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (p[i] - mp) * (p[i] - mp);
  }
  return sab / std::sqrt(saa * sbb);
}

inline double theil_oracle(const std::vector<double>& a, const std::vector<double>& p) {
  const double n = static_cast<double>(a.size());
  double se = 0, sa = 0, sp = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    se += (a[i] - p[i]) * (a[i] - p[i]);
    sa += a[i] * a[i];
    sp += p[i] * p[i];
  }
  return std::sqrt(se / n) / (std::sqrt(sa / n) + std::sqrt(sp / n));
}

// Linear-interpolated (type 7) empirical quantile, sorting a copy.
inline double quantile_oracle(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double h = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace cgb::test
