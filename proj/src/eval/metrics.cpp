#include "cgboost/eval/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "cgboost/error.hpp"

namespace cgb::eval {
namespace {

void require_pair(std::span<const double> a, std::span<const double> p, const char* what) {
  if (a.size() != p.size()) throw ShapeError(fmt::format("{}: {} actual vs {} predicted values", what, a.size(), p.size()));
  if (a.empty()) throw DomainError(fmt::format("{} of empty series", what));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(p[i])) throw DomainError(fmt::format("{}: non-finite value", what));
  }
}

double mean(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

double mape(std::span<const double> actual, std::span<const double> pred) {
  require_pair(actual, pred, "mape");
  double s = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] == 0.0) throw DomainError(fmt::format("mape: actual value {} is zero", i));
    s += std::abs((actual[i] - pred[i]) / actual[i]);
  }
  return s / static_cast<double>(actual.size());
}

double correlation(std::span<const double> actual, std::span<const double> pred) {
  require_pair(actual, pred, "correlation");
  if (actual.size() < 2) throw DomainError("R undefined: fewer than two values");
  const double ma = mean(actual), mp = mean(pred);
  double cov = 0, va = 0, vp = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double da = actual[i] - ma, dp = pred[i] - mp;
    cov += da * dp;
    va += da * da;
    vp += dp * dp;
  }
  if (va == 0.0 || vp == 0.0) throw DomainError("R undefined: constant series");
  return std::clamp(cov / std::sqrt(va * vp), -1.0, 1.0);
}

double theil_u(std::span<const double> actual, std::span<const double> pred) {
  require_pair(actual, pred, "theil_u");
  double se = 0, sa = 0, sp = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double e = actual[i] - pred[i];
    se += e * e;
    sa += actual[i] * actual[i];
    sp += pred[i] * pred[i];
  }
  if (sa == 0.0 && sp == 0.0) throw DomainError("theil_u: both series are all zero");
  const double n = static_cast<double>(actual.size());
  return std::min(1.0, std::sqrt(se / n) / (std::sqrt(sa / n) + std::sqrt(sp / n)));
}

}  // namespace cgb::eval
