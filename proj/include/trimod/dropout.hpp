#pragma once

#include <functional>
#include <random>
#include <string_view>

#include "trimod/autograd.hpp"

namespace trimod {

/// Inverted dropout mask: each coordinate is 0 with probability p, otherwise
/// 1/(1-p). Requires p in [0, 1).
Tensor dropout_mask(const Shape& shape, double p, std::mt19937_64& rng);

/// Applies a fresh inverted-dropout mask to `values` (tensor form).
Tensor dropout(const Tensor& values, double p, std::mt19937_64& rng);

/// Training-time dropout on embedding outputs. A default-constructed
/// instance (rate 0, no rng) is the identity, which is the inference mode.
struct EmbeddingDropout {
  double rate = 0.0;
  std::mt19937_64* rng = nullptr;
  /// Instrumentation: called with the site name every time a mask is applied.
  std::function<void(std::string_view site)> on_apply;

  bool active() const { return rng != nullptr && rate > 0.0; }
  Var apply(Var x, std::string_view site) const;
};

}  // namespace trimod
