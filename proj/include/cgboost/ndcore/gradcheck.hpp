#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "cgboost/ndcore/network.hpp"

namespace cgb::nd {

struct GradTolerance {
  double relative = 1e-4;
  double absolute = 1e-7;  // accepted regardless of relative error
  double step = 1e-5;      // central-difference h
};

struct GradCheckStats {
  std::size_t checked = 0;
  std::size_t failures = 0;
  double worst_relative = 0.0;  // over entries not accepted by the absolute floor
  double worst_absolute = 0.0;

  void merge(const GradCheckStats& other);
  bool ok() const { return failures == 0; }
};

bool gradient_close(double analytic, double numeric, const GradTolerance& tol);

// Perturbs each entry of `values` in place by +-h, evaluates `objective`, and
// compares the central difference against `analytic`. Values are restored.
void check_against_central_differences(std::span<double> values, std::span<const double> analytic,
                                       const std::function<double()>& objective, const GradTolerance& tol,
                                       GradCheckStats& stats);

// Checks backward() for every parameter and the input of `net` on the scalar
// objective <forward(x), upstream>.
GradCheckStats check_network_gradients(Network& net, Tensor x, const Tensor& upstream,
                                       const GradTolerance& tol = {});

}  // namespace cgb::nd
