#include "trimod/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace trimod {
namespace {

constexpr std::array<std::string_view, kNumModalities> kNames = {"text", "visual", "hashtag"};

}  // namespace

std::string_view modality_name(Modality m) { return kNames[static_cast<std::size_t>(m)]; }

Fusion Fusion::declare(ParameterStore& store, const std::string& prefix,
                       std::size_t fused_dim,
                       const std::array<std::size_t, kNumModalities>& input_dims,
                       std::mt19937_64& rng) {
  for (std::size_t m = 0; m < kNumModalities; ++m) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(input_dims[m]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Tensor w({fused_dim, input_dims[m]});
    for (auto& v : w.values()) v = dist(rng);
    const std::string base = prefix + "." + std::string(kNames[m]);
    store.add(base + ".W", std::move(w));
    store.add(base + ".b", Tensor({fused_dim}));
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(fused_dim));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor u({fused_dim});
  for (auto& v : u.values()) v = dist(rng);
  store.add(prefix + ".u", std::move(u));
  return bind(store, prefix);
}

Fusion Fusion::bind(ParameterStore& store, const std::string& prefix) {
  Fusion f;
  for (std::size_t m = 0; m < kNumModalities; ++m) {
    const std::string base = prefix + "." + std::string(kNames[m]);
    f.w_[m] = &store.at(base + ".W");
    f.b_[m] = &store.at(base + ".b");
  }
  f.u_ = &store.at(prefix + ".u");
  const std::size_t d = f.u_->value.size();
  for (std::size_t m = 0; m < kNumModalities; ++m) {
    if (f.w_[m]->value.rank() != 2 || f.w_[m]->value.dim(0) != d ||
        f.b_[m]->value.shape() != Shape{d}) {
      throw DimensionError("fusion projection for " + std::string(kNames[m]) +
                           " does not produce the fused dimension " + std::to_string(d));
    }
  }
  return f;
}

std::size_t Fusion::input_dim(Modality m) const {
  return w_[static_cast<std::size_t>(m)]->value.dim(1);
}

Var Fusion::project(Graph& g, const ModalFeature& feature) const {
  const auto m = static_cast<std::size_t>(feature.modality);
  if (feature.value.shape() != Shape{input_dim(feature.modality)}) {
    throw DimensionError(std::string(kNames[m]) + " feature has shape " +
                         shape_to_string(feature.value.shape()) + ", expected [" +
                         std::to_string(input_dim(feature.modality)) + "]");
  }
  return affine(g.param(*w_[m]), feature.value, g.param(*b_[m]));
}

FusedToken Fusion::combine(Graph& g, std::span<const Var> projected) const {
  if (projected.empty()) throw ContractError("fusion needs at least one feature");
  auto u = g.param(*u_);
  std::vector<Var> scores;
  scores.reserve(projected.size());
  for (const auto& p : projected) scores.push_back(dot(u, tanh(p)));
  // Sum in a canonical order so permuting the inputs gives bit-identical output.
  std::vector<std::size_t> order(projected.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double sa = scores[a].item(), sb = scores[b].item();
    if (sa != sb) return sa < sb;
    const auto va = projected[a].value().values(), vb = projected[b].value().values();
    return std::lexicographical_compare(va.begin(), va.end(), vb.begin(), vb.end());
  });
  std::vector<Var> sorted_scores, sorted_features;
  for (auto i : order) {
    sorted_scores.push_back(scores[i]);
    sorted_features.push_back(projected[i]);
  }
  auto weights = softmax(concat(std::span<const Var>(sorted_scores)));
  FusedToken out{weighted_sum(weights, sorted_features), {}};
  out.weights.resize(projected.size());
  for (std::size_t k = 0; k < order.size(); ++k) out.weights[order[k]] = weights.value()[k];
  return out;
}

FusedToken Fusion::fuse(Graph& g, std::span<const ModalFeature> features) const {
  if (features.empty()) throw ContractError("fusion needs at least one feature");
  std::vector<Var> projected;
  projected.reserve(features.size());
  for (const auto& f : features) projected.push_back(project(g, f));
  return combine(g, projected);
}

std::vector<FusedToken> Fusion::fuse_post(Graph& g, std::span<const Var> text_features,
                                          std::span<const ModalFeature> post_features) const {
  if (text_features.empty()) throw ContractError("fuse_post: no tokens");
  std::vector<Var> projected(1 + post_features.size());
  for (std::size_t k = 0; k < post_features.size(); ++k) {
    projected[k + 1] = project(g, post_features[k]);
  }
  std::vector<FusedToken> out;
  out.reserve(text_features.size());
  for (const auto& h : text_features) {
    projected[0] = project(g, {Modality::Text, h});
    out.push_back(combine(g, projected));
  }
  return out;
}

std::vector<Parameter*> Fusion::parameters() const {
  std::vector<Parameter*> out;
  for (std::size_t m = 0; m < kNumModalities; ++m) {
    out.push_back(w_[m]);
    out.push_back(b_[m]);
  }
  out.push_back(u_);
  return out;
}

}  // namespace trimod
