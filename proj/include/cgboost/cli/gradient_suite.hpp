#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cgboost/ndcore/gradcheck.hpp"

namespace cgb::cli {

struct GradientSuiteEntry {
  std::string name;  // layer kind, "sae_loss/<arch>" or "resnet"
  std::size_t cases = 0;
  nd::GradCheckStats stats;
};

struct GradientSuiteResult {
  std::vector<GradientSuiteEntry> entries;
  double seconds = 0;

  bool ok() const;
};

// Central-difference check of every layer kind, the full sparse autoencoder
// loss (both encoder architectures) and the residual CNN regressor, with
// `cases` random draws each. Draws that land within 1e-3 of a ReLU kink are
// redrawn.
GradientSuiteResult run_gradient_suite(std::uint64_t seed, std::size_t cases = 100,
                                       const nd::GradTolerance& tol = {});

}  // namespace cgb::cli
