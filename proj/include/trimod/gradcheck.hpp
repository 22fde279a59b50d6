#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "trimod/autograd.hpp"

namespace trimod {

struct GradCheckOptions {
  double eps = 1e-5;
  /// Coordinates probed per parameter; 0 probes all of them.
  std::size_t max_coords_per_param = 0;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates_checked = 0;
};

/// Builds the scalar objective on a fresh graph from the current parameter values.
using Objective = std::function<Var(Graph&)>;

/// Compares backward() against central differences
///   (f(x + eps) - f(x - eps)) / (2 eps)
/// per probed coordinate, with relative error
///   |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
/// Parameter values are restored exactly; gradients are left zeroed.
GradCheckResult grad_check(const Objective& f, std::span<Parameter* const> params,
                           const GradCheckOptions& options = {});

}  // namespace trimod
