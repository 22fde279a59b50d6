#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include "trimod/autograd.hpp"
#include "trimod/labels.hpp"

namespace trimod {

/// Score given to transitions that can never be taken.
inline constexpr double kForbiddenTransition = -10000.0;

/// Linear-chain CRF over L labels.
///
/// Emissions P are [n x L]: P(i, y) scores token i under label y.
/// Transitions T are [(L+2) x (L+2)]: T(a, b) scores a -> b, where row/column
/// L is START and L+1 is END. A path y_1..y_n scores
///   T(START, y_1) + sum_i T(y_{i-1}, y_i) + T(y_n, END) + sum_i P(i, y_i).
namespace crf {

inline std::size_t start_state(std::size_t num_labels) { return num_labels; }
inline std::size_t end_state(std::size_t num_labels) { return num_labels + 1; }

double path_score(const Tensor& emissions, const Tensor& transitions,
                  std::span<const std::size_t> labels);

/// log sum over all L^n paths of exp(path_score), by the forward algorithm.
double log_partition(const Tensor& emissions, const Tensor& transitions);

/// exp(path_score - log_partition).
double sequence_prob(const Tensor& emissions, const Tensor& transitions,
                     std::span<const std::size_t> labels);

/// log_partition - path_score(gold).
double nll(const Tensor& emissions, const Tensor& transitions,
           std::span<const std::size_t> gold);

/// Per-token label marginals [n x L] and expected transition counts
/// [(L+2) x (L+2)] under the CRF distribution.
struct Marginals {
  Tensor unary;
  Tensor transitions;
  double log_partition = 0.0;
};
Marginals marginals(const Tensor& emissions, const Tensor& transitions);

struct Decoded {
  std::vector<std::size_t> labels;
  double score = 0.0;
};

/// Highest-scoring path. Ties resolve toward the lower label index both when
/// choosing a predecessor and when choosing the final label.
Decoded viterbi_decode(const Tensor& emissions, const Tensor& transitions);

/// Entries that are fixed at kForbiddenTransition: every transition into
/// START and out of END, plus (when `bio2`) every illegal BIO2 move for the
/// 9-label tag set. Row-major [(L+2) x (L+2)] flags.
std::vector<bool> fixed_transition_mask(std::size_t num_labels, bool bio2);

/// Writes kForbiddenTransition into every masked entry.
void apply_fixed_transitions(Tensor& transitions, const std::vector<bool>& mask);

/// Fresh transition matrix: free entries uniform(-0.1, 0.1), fixed entries forbidden.
Tensor initial_transitions(std::size_t num_labels, bool bio2, std::mt19937_64& rng);

}  // namespace crf

/// Differentiable CRF negative log-likelihood. Gradients: marginals minus the
/// gold indicator for both emissions and transitions.
Var crf_nll(Var emissions, Var transitions, std::span<const std::size_t> gold);

/// Affine map from fused token vectors to per-label scores.
class EmissionHead {
 public:
  static EmissionHead declare(ParameterStore& store, const std::string& prefix,
                              std::size_t input_dim, std::size_t num_labels,
                              std::mt19937_64& rng);
  static EmissionHead bind(ParameterStore& store, const std::string& prefix);

  /// [n x L] emission matrix for n token vectors.
  Var emissions(Graph& g, std::span<const Var> tokens) const;

  std::size_t input_dim() const { return w_->value.dim(1); }
  std::size_t num_labels() const { return w_->value.dim(0); }
  std::vector<Parameter*> parameters() const { return {w_, b_}; }

 private:
  Parameter* w_ = nullptr;
  Parameter* b_ = nullptr;
};

}  // namespace trimod
