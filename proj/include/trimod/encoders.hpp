#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include "trimod/autograd.hpp"
#include "trimod/dropout.hpp"
#include "trimod/embeddings.hpp"

namespace trimod {

/// Gated recurrent unit:
///   z  = sigmoid(W_z x + U_z h + b_z)
///   r  = sigmoid(W_r x + U_r h + b_r)
///   h~ = tanh(W_h x + U_h (r * h) + b_h)
///   h' = (1 - z) * h + z * h~
class GruCell {
 public:
  /// Declares `<prefix>.{W,U,b}_{z,r,h}`. Matrices are drawn from
  /// uniform(-1/sqrt(hidden), 1/sqrt(hidden)); biases start at zero.
  static GruCell declare(ParameterStore& store, const std::string& prefix,
                         std::size_t input_size, std::size_t hidden_size,
                         std::mt19937_64& rng);
  static GruCell bind(ParameterStore& store, const std::string& prefix);

  Var step(Graph& g, Var x, Var h_prev) const;

  std::size_t input_size() const { return w_z_->value.dim(1); }
  std::size_t hidden_size() const { return w_z_->value.dim(0); }
  std::vector<Parameter*> parameters() const;

 private:
  Parameter *w_z_, *w_r_, *w_h_;
  Parameter *u_z_, *u_r_, *u_h_;
  Parameter *b_z_, *b_r_, *b_h_;
};

/// Hidden states of both directions, indexed by input position: backward[i]
/// is the backward cell's state after consuming positions n-1 down to i.
struct BiStates {
  std::vector<Var> forward;
  std::vector<Var> backward;
};

class BiGru {
 public:
  BiGru(GruCell forward, GruCell backward);

  static BiGru declare(ParameterStore& store, const std::string& prefix,
                       std::size_t input_size, std::size_t hidden_size,
                       std::mt19937_64& rng);
  static BiGru bind(ParameterStore& store, const std::string& prefix);

  /// Runs both directions from zero initial states. `inputs` must be non-empty.
  BiStates run(Graph& g, std::span<const Var> inputs) const;

  std::size_t hidden_size() const { return forward_.hidden_size(); }
  std::size_t input_size() const { return forward_.input_size(); }
  const GruCell& forward_cell() const { return forward_; }
  const GruCell& backward_cell() const { return backward_; }
  std::vector<Parameter*> parameters() const;

 private:
  GruCell forward_;
  GruCell backward_;
};

/// [last forward state; first backward state] over a token's characters.
Var char_encode(Graph& g, const BiGru& char_gru, std::span<const Var> char_embeddings);

/// Per-token [forward; backward] sentence states.
std::vector<Var> sentence_encode(Graph& g, const BiGru& word_gru,
                                 std::span<const Var> token_representations);

/// Word + character text encoder producing the contextual token features.
class TextEncoder {
 public:
  TextEncoder(WordTable words, CharTable chars, BiGru char_gru, BiGru word_gru);

  /// [word embedding; char representation], dropout applied to both embedding
  /// outputs when `dropout` is active.
  Var token_represent(Graph& g, std::string_view token,
                      const EmbeddingDropout& dropout = {}) const;
  /// One vector of size 2 * word-GRU hidden per token. Throws ContractError
  /// on an empty sentence.
  std::vector<Var> encode(Graph& g, std::span<const std::string> tokens,
                          const EmbeddingDropout& dropout = {}) const;

  const WordTable& words() const { return words_; }
  const CharTable& chars() const { return chars_; }
  const BiGru& char_gru() const { return char_gru_; }
  const BiGru& word_gru() const { return word_gru_; }

  std::size_t token_dim() const { return words_.dim() + 2 * char_gru_.hidden_size(); }
  std::size_t output_dim() const { return 2 * word_gru_.hidden_size(); }

 private:
  WordTable words_;
  CharTable chars_;
  BiGru char_gru_;
  BiGru word_gru_;
};

}  // namespace trimod
