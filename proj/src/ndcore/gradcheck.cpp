#include "cgboost/ndcore/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "cgboost/error.hpp"

namespace cgb::nd {

void GradCheckStats::merge(const GradCheckStats& other) {
  checked += other.checked;
  failures += other.failures;
  worst_relative = std::max(worst_relative, other.worst_relative);
  worst_absolute = std::max(worst_absolute, other.worst_absolute);
}

bool gradient_close(double analytic, double numeric, const GradTolerance& tol) {
  const double diff = std::abs(analytic - numeric);
  if (diff < tol.absolute) return true;
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  return diff / scale < tol.relative;
}

void check_against_central_differences(std::span<double> values, std::span<const double> analytic,
                                       const std::function<double()>& objective, const GradTolerance& tol,
                                       GradCheckStats& stats) {
  if (values.size() != analytic.size()) throw ShapeError("gradient check: value/gradient length mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + tol.step;
    const double up = objective();
    values[i] = saved - tol.step;
    const double down = objective();
    values[i] = saved;
    const double numeric = (up - down) / (2.0 * tol.step);
    ++stats.checked;
    const double diff = std::abs(analytic[i] - numeric);
    stats.worst_absolute = std::max(stats.worst_absolute, diff);
    if (diff >= tol.absolute) {
      const double scale = std::max(std::abs(analytic[i]), std::abs(numeric));
      stats.worst_relative = std::max(stats.worst_relative, diff / scale);
    }
    if (!gradient_close(analytic[i], numeric, tol)) ++stats.failures;
  }
}

GradCheckStats check_network_gradients(Network& net, Tensor x, const Tensor& upstream, const GradTolerance& tol) {
  const Gradients grads = backward(net, x, upstream);
  auto objective = [&] {
    const Tensor y = forward(net, x);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * upstream[i];
    return s;
  };
  GradCheckStats stats;
  auto params = net.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    check_against_central_differences(params[i].tensor->data(), grads.params[i].data(), objective, tol, stats);
  }
  check_against_central_differences(x.data(), grads.input.data(), objective, tol, stats);
  return stats;
}

}  // namespace cgb::nd
