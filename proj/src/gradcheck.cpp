#include "trimod/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace trimod {
namespace {

double evaluate(const Objective& f) {
  Graph g;
  const double v = f(g).item();
  if (!std::isfinite(v)) throw NumericError("grad_check: objective is not finite");
  return v;
}

std::vector<std::size_t> probe_indices(std::size_t n, std::size_t cap,
                                       std::mt19937_64& rng) {
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (cap == 0 || cap >= n) return all;
  std::vector<std::size_t> picked;
  picked.reserve(cap);
  std::sample(all.begin(), all.end(), std::back_inserter(picked), cap, rng);
  return picked;
}

}  // namespace

GradCheckResult grad_check(const Objective& f, std::span<Parameter* const> params,
                           const GradCheckOptions& options) {
  if (!(options.eps > 0.0)) throw ContractError("grad_check: eps must be positive");

  for (auto* p : params) p->zero_grad();
  {
    Graph g;
    auto out = f(g);
    if (!std::isfinite(out.item())) {
      throw NumericError("grad_check: objective is not finite");
    }
    g.backward(out);
  }

  GradCheckResult result;
  std::mt19937_64 rng(options.seed);
  for (auto* p : params) {
    const Tensor analytic = p->grad;
    for (std::size_t i : probe_indices(p->value.size(), options.max_coords_per_param, rng)) {
      const double original = p->value[i];
      p->value[i] = original + options.eps;
      const double up = evaluate(f);
      p->value[i] = original - options.eps;
      const double down = evaluate(f);
      p->value[i] = original;

      const double numeric = (up - down) / (2.0 * options.eps);
      const double denom =
          std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
      const double rel = std::abs(analytic[i] - numeric) / denom;
      ++result.coordinates_checked;
      if (rel > result.max_relative_error || result.worst_parameter.empty()) {
        if (rel >= result.max_relative_error) {
          result.max_relative_error = rel;
          result.worst_parameter = p->name;
          result.worst_index = i;
          result.worst_analytic = analytic[i];
          result.worst_numeric = numeric;
        }
      }
    }
    p->zero_grad();
  }
  return result;
}

}  // namespace trimod
