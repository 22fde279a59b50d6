#include "trimod/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace trimod {
namespace crf {
namespace {

void validate(const Tensor& P, const Tensor& T) {
  if (P.rank() != 2) {
    throw DimensionError("emissions must be [n x L], got " + shape_to_string(P.shape()));
  }
  const std::size_t L = P.dim(1);
  if (T.shape() != Shape{L + 2, L + 2}) {
    throw DimensionError("transitions must be [" + std::to_string(L + 2) + "x" +
                         std::to_string(L + 2) + "] for " + std::to_string(L) +
                         " labels, got " + shape_to_string(T.shape()));
  }
}

void validate_labels(const Tensor& P, std::span<const std::size_t> labels) {
  if (labels.size() != P.dim(0)) {
    throw DimensionError("label sequence has length " + std::to_string(labels.size()) +
                         " but there are " + std::to_string(P.dim(0)) + " tokens");
  }
  for (auto y : labels) {
    if (y >= P.dim(1)) throw DimensionError("label index " + std::to_string(y) + " out of range");
  }
}

double log_sum_exp(std::span<const double> xs) {
  const double mx = *std::max_element(xs.begin(), xs.end());
  if (mx == -std::numeric_limits<double>::infinity()) return mx;
  double total = 0.0;
  for (double x : xs) total += std::exp(x - mx);
  return mx + std::log(total);
}

// alpha(i, y): log-sum of all prefixes ending in y at token i (emission included).
Tensor forward_scores(const Tensor& P, const Tensor& T) {
  const std::size_t n = P.dim(0), L = P.dim(1), S = start_state(L);
  Tensor alpha({n, L});
  std::vector<double> terms(L);
  for (std::size_t y = 0; y < L; ++y) alpha.at(0, y) = T.at(S, y) + P.at(0, y);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t y = 0; y < L; ++y) {
      for (std::size_t x = 0; x < L; ++x) terms[x] = alpha.at(i - 1, x) + T.at(x, y);
      alpha.at(i, y) = P.at(i, y) + log_sum_exp(terms);
    }
  }
  return alpha;
}

// beta(i, y): log-sum of all suffixes after token i given y at i (END included).
Tensor backward_scores(const Tensor& P, const Tensor& T) {
  const std::size_t n = P.dim(0), L = P.dim(1), E = end_state(L);
  Tensor beta({n, L});
  std::vector<double> terms(L);
  for (std::size_t y = 0; y < L; ++y) beta.at(n - 1, y) = T.at(y, E);
  for (std::size_t i = n - 1; i-- > 0;) {
    for (std::size_t x = 0; x < L; ++x) {
      for (std::size_t y = 0; y < L; ++y) {
        terms[y] = T.at(x, y) + P.at(i + 1, y) + beta.at(i + 1, y);
      }
      beta.at(i, x) = log_sum_exp(terms);
    }
  }
  return beta;
}

double finish(const Tensor& alpha, const Tensor& T) {
  const std::size_t n = alpha.dim(0), L = alpha.dim(1), E = end_state(L);
  std::vector<double> terms(L);
  for (std::size_t y = 0; y < L; ++y) terms[y] = alpha.at(n - 1, y) + T.at(y, E);
  return log_sum_exp(terms);
}

}  // namespace

double path_score(const Tensor& P, const Tensor& T, std::span<const std::size_t> labels) {
  validate(P, T);
  validate_labels(P, labels);
  const std::size_t L = P.dim(1);
  double score = T.at(start_state(L), labels.front());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    score += P.at(i, labels[i]);
    if (i > 0) score += T.at(labels[i - 1], labels[i]);
  }
  return score + T.at(labels.back(), end_state(L));
}

double log_partition(const Tensor& P, const Tensor& T) {
  validate(P, T);
  return finish(forward_scores(P, T), T);
}

double sequence_prob(const Tensor& P, const Tensor& T, std::span<const std::size_t> labels) {
  return std::exp(path_score(P, T, labels) - log_partition(P, T));
}

double nll(const Tensor& P, const Tensor& T, std::span<const std::size_t> gold) {
  return log_partition(P, T) - path_score(P, T, gold);
}

Marginals marginals(const Tensor& P, const Tensor& T) {
  validate(P, T);
  const std::size_t n = P.dim(0), L = P.dim(1), S = start_state(L), E = end_state(L);
  const Tensor alpha = forward_scores(P, T);
  const Tensor beta = backward_scores(P, T);
  Marginals m{Tensor({n, L}), Tensor({L + 2, L + 2}), finish(alpha, T)};
  const double logz = m.log_partition;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t y = 0; y < L; ++y) {
      m.unary.at(i, y) = std::exp(alpha.at(i, y) + beta.at(i, y) - logz);
    }
  }
  for (std::size_t y = 0; y < L; ++y) {
    m.transitions.at(S, y) = m.unary.at(0, y);
    m.transitions.at(y, E) = m.unary.at(n - 1, y);
  }
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t x = 0; x < L; ++x) {
      for (std::size_t y = 0; y < L; ++y) {
        m.transitions.at(x, y) +=
            std::exp(alpha.at(i - 1, x) + T.at(x, y) + P.at(i, y) + beta.at(i, y) - logz);
      }
    }
  }
  return m;
}

Decoded viterbi_decode(const Tensor& P, const Tensor& T) {
  validate(P, T);
  const std::size_t n = P.dim(0), L = P.dim(1), S = start_state(L), E = end_state(L);
  Tensor best({n, L});
  std::vector<std::size_t> back(n * L, 0);
  for (std::size_t y = 0; y < L; ++y) best.at(0, y) = T.at(S, y) + P.at(0, y);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t y = 0; y < L; ++y) {
      std::size_t arg = 0;
      double top = best.at(i - 1, 0) + T.at(0, y);
      for (std::size_t x = 1; x < L; ++x) {
        const double s = best.at(i - 1, x) + T.at(x, y);
        if (s > top) {
          top = s;
          arg = x;
        }
      }
      best.at(i, y) = top + P.at(i, y);
      back[i * L + y] = arg;
    }
  }
  Decoded out;
  std::size_t last = 0;
  out.score = best.at(n - 1, 0) + T.at(0, E);
  for (std::size_t y = 1; y < L; ++y) {
    const double s = best.at(n - 1, y) + T.at(y, E);
    if (s > out.score) {
      out.score = s;
      last = y;
    }
  }
  out.labels.resize(n);
  out.labels[n - 1] = last;
  for (std::size_t i = n - 1; i > 0; --i) out.labels[i - 1] = back[i * L + out.labels[i]];
  return out;
}

std::vector<bool> fixed_transition_mask(std::size_t num_labels, bool bio2) {
  const std::size_t L = num_labels, N = L + 2, S = start_state(L), E = end_state(L);
  if (bio2 && L != kNumTags) {
    throw ContractError("BIO2 constraints need the " + std::to_string(kNumTags) +
                        "-label tag set");
  }
  std::vector<bool> mask(N * N, false);
  for (std::size_t a = 0; a < N; ++a) {
    mask[a * N + S] = true;
    mask[E * N + a] = true;
  }
  if (bio2) {
    for (std::size_t b = 0; b < L; ++b) {
      const Tag next = tag_from_index(b);
      if (!transition_allowed(std::nullopt, next)) mask[S * N + b] = true;
      for (std::size_t a = 0; a < L; ++a) {
        if (!transition_allowed(tag_from_index(a), next)) mask[a * N + b] = true;
      }
    }
  }
  return mask;
}

void apply_fixed_transitions(Tensor& transitions, const std::vector<bool>& mask) {
  if (mask.size() != transitions.size()) {
    throw DimensionError("transition mask does not match the transition matrix");
  }
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) transitions[i] = kForbiddenTransition;
  }
}

Tensor initial_transitions(std::size_t num_labels, bool bio2, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-0.1, 0.1);
  Tensor t({num_labels + 2, num_labels + 2});
  for (auto& v : t.values()) v = dist(rng);
  apply_fixed_transitions(t, fixed_transition_mask(num_labels, bio2));
  return t;
}

}  // namespace crf

Var crf_nll(Var emissions, Var transitions, std::span<const std::size_t> gold) {
  const auto& P = emissions.value();
  const auto& T = transitions.value();
  auto m = crf::marginals(P, T);
  const double gold_score = crf::path_score(P, T, gold);
  const std::size_t L = P.dim(1);

  // Gold indicator subtracted in place: these become the gradients.
  Tensor d_emit = std::move(m.unary);
  Tensor d_trans = std::move(m.transitions);
  d_trans.at(crf::start_state(L), gold.front()) -= 1.0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    d_emit.at(i, gold[i]) -= 1.0;
    if (i > 0) d_trans.at(gold[i - 1], gold[i]) -= 1.0;
  }
  d_trans.at(gold.back(), crf::end_state(L)) -= 1.0;

  const int ie = emissions.id(), it = transitions.id();
  Var inputs[] = {emissions, transitions};
  return emissions.graph().record(
      Tensor::scalar(m.log_partition - gold_score), inputs,
      [ie, it, d_emit = std::move(d_emit), d_trans = std::move(d_trans)](Graph& g, int self) {
        const double G = g.grad(self)[0];
        if (g.requires_grad(ie)) {
          auto& dst = g.grad(ie);
          for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += G * d_emit[i];
        }
        if (g.requires_grad(it)) {
          auto& dst = g.grad(it);
          for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += G * d_trans[i];
        }
      });
}

EmissionHead EmissionHead::declare(ParameterStore& store, const std::string& prefix,
                                   std::size_t input_dim, std::size_t num_labels,
                                   std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor w({num_labels, input_dim});
  for (auto& v : w.values()) v = dist(rng);
  store.add(prefix + ".W", std::move(w));
  store.add(prefix + ".b", Tensor({num_labels}));
  return bind(store, prefix);
}

EmissionHead EmissionHead::bind(ParameterStore& store, const std::string& prefix) {
  EmissionHead head;
  head.w_ = &store.at(prefix + ".W");
  head.b_ = &store.at(prefix + ".b");
  if (head.w_->value.rank() != 2 || head.b_->value.shape() != Shape{head.w_->value.dim(0)}) {
    throw DimensionError("emission head parameters have inconsistent shapes");
  }
  return head;
}

Var EmissionHead::emissions(Graph& g, std::span<const Var> tokens) const {
  if (tokens.empty()) throw ContractError("emissions: no tokens");
  auto w = g.param(*w_);
  auto b = g.param(*b_);
  std::vector<Var> rows;
  rows.reserve(tokens.size());
  for (const auto& t : tokens) rows.push_back(affine(w, t, b));
  return stack(rows);
}

}  // namespace trimod
