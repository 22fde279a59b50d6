#include "trimod/dropout.hpp"

namespace trimod {

Tensor dropout_mask(const Shape& shape, double p, std::mt19937_64& rng) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw ContractError("dropout rate must lie in [0, 1), got " + std::to_string(p));
  }
  Tensor mask(shape);
  if (p == 0.0) {
    mask.fill(1.0);
    return mask;
  }
  const double keep = 1.0 / (1.0 - p);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& v : mask.values()) v = u(rng) < p ? 0.0 : keep;
  return mask;
}

Tensor dropout(const Tensor& values, double p, std::mt19937_64& rng) {
  Tensor out = dropout_mask(values.shape(), p, rng);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= values[i];
  return out;
}

Var EmbeddingDropout::apply(Var x, std::string_view site) const {
  if (!active()) return x;
  if (on_apply) on_apply(site);
  return mul(x, x.graph().constant(dropout_mask(x.shape(), rate, *rng)));
}

}  // namespace trimod
