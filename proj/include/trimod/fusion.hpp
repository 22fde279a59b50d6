#pragma once

#include <array>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "trimod/autograd.hpp"

namespace trimod {

enum class Modality : std::uint8_t { Text = 0, Visual, Hashtag };

inline constexpr std::size_t kNumModalities = 3;

std::string_view modality_name(Modality m);

struct ModalFeature {
  Modality modality;
  Var value;
};

struct FusedToken {
  Var vector;
  /// Normalized attention weight per input feature, in input order.
  std::vector<double> weights;
};

/// Attention fusion of modality feature vectors:
///   f'_i  = W_i f_i + b_i
///   s_i   = u . tanh(f'_i)
///   a_i   = exp(s_i) / sum_j exp(s_j)
///   f_s   = sum_i a_i f'_i
class Fusion {
 public:
  /// Declares `<prefix>.{text,visual,hashtag}.{W,b}` and `<prefix>.u`.
  static Fusion declare(ParameterStore& store, const std::string& prefix,
                        std::size_t fused_dim,
                        const std::array<std::size_t, kNumModalities>& input_dims,
                        std::mt19937_64& rng);
  static Fusion bind(ParameterStore& store, const std::string& prefix);

  /// f'_i for one modality.
  Var project(Graph& g, const ModalFeature& feature) const;
  /// Attention over already-projected features.
  FusedToken combine(Graph& g, std::span<const Var> projected) const;
  /// project + combine. Throws ContractError on an empty list.
  FusedToken fuse(Graph& g, std::span<const ModalFeature> features) const;

  /// Per-token fusion of contextual text features with post-level features;
  /// post-level projections are computed once and shared across tokens.
  std::vector<FusedToken> fuse_post(Graph& g, std::span<const Var> text_features,
                                    std::span<const ModalFeature> post_features) const;

  std::size_t fused_dim() const { return u_->value.size(); }
  std::size_t input_dim(Modality m) const;
  std::vector<Parameter*> parameters() const;

 private:
  std::array<Parameter*, kNumModalities> w_{};
  std::array<Parameter*, kNumModalities> b_{};
  Parameter* u_ = nullptr;
};

}  // namespace trimod
