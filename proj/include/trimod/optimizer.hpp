#pragma once

#include <span>

#include "trimod/tensor.hpp"

namespace trimod {

struct SgdOptions {
  double learning_rate = 0.005;
  double l1 = 0.0;
  double l2 = 0.0;
  /// Global gradient-norm threshold; <= 0 disables clipping.
  double clip_norm = 5.0;
};

/// Global L2 norm of all gradients.
double gradient_norm(std::span<Parameter* const> params);

/// Clips the global gradient norm to `clip_norm`, then applies
///   theta <- theta - lr * (g + l1 * sign(theta) + l2 * theta)
/// and resets every gradient to zero. Throws NumericError naming the first
/// parameter holding a non-finite gradient (before touching any value).
void sgd_step(std::span<Parameter* const> params, const SgdOptions& options);

}  // namespace trimod
