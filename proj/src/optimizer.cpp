#include "trimod/optimizer.hpp"

#include <cmath>

namespace trimod {

double gradient_norm(std::span<Parameter* const> params) {
  double total = 0.0;
  for (const auto* p : params) {
    for (double g : p->grad.values()) total += g * g;
  }
  return std::sqrt(total);
}

void sgd_step(std::span<Parameter* const> params, const SgdOptions& options) {
  for (const auto* p : params) {
    if (!p->grad.all_finite()) {
      throw NumericError("non-finite gradient in parameter '" + p->name + "'");
    }
  }
  double factor = 1.0;
  if (options.clip_norm > 0.0) {
    const double norm = gradient_norm(params);
    if (norm > options.clip_norm) factor = options.clip_norm / norm;
  }
  const double lr = options.learning_rate;
  for (auto* p : params) {
    double* theta = p->value.data();
    const double* grad = p->grad.data();
    const std::size_t n = p->value.size();
    for (std::size_t i = 0; i < n; ++i) {
      double step = factor * grad[i];
      if (options.l1 != 0.0) {
        step += options.l1 * static_cast<double>((theta[i] > 0.0) - (theta[i] < 0.0));
      }
      if (options.l2 != 0.0) step += options.l2 * theta[i];
      theta[i] -= lr * step;
    }
    p->zero_grad();
  }
}

}  // namespace trimod
