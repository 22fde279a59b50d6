#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "trimod/gradcheck.hpp"

namespace trimod {

/// Names accepted by run_gradcheck, in pipeline order.
const std::vector<std::string>& gradcheck_modules();

struct GradCheckSuiteOptions {
  double eps = 1e-5;
  /// Table-sized dimensions with sampled coordinates instead of small
  /// dimensions with every coordinate probed.
  bool full_size = false;
  std::uint64_t seed = 11;
};

/// Gradient check of one module on a small random instance. Throws
/// ContractError for an unknown module name.
GradCheckResult run_gradcheck(std::string_view module, const GradCheckSuiteOptions& options = {});

}  // namespace trimod
