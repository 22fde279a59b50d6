#include "trimod/encoders.hpp"

#include <cmath>

namespace trimod {
namespace {

Tensor uniform_matrix(std::size_t rows, std::size_t cols, double bound,
                      std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t({rows, cols});
  for (auto& v : t.values()) v = dist(rng);
  return t;
}

}  // namespace

GruCell GruCell::declare(ParameterStore& store, const std::string& prefix,
                         std::size_t input_size, std::size_t hidden_size,
                         std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_size));
  for (const char* gate : {"z", "r", "h"}) {
    store.add(prefix + ".W_" + gate, uniform_matrix(hidden_size, input_size, bound, rng));
    store.add(prefix + ".U_" + gate, uniform_matrix(hidden_size, hidden_size, bound, rng));
    store.add(prefix + ".b_" + gate, Tensor({hidden_size}));
  }
  return bind(store, prefix);
}

GruCell GruCell::bind(ParameterStore& store, const std::string& prefix) {
  GruCell cell;
  cell.w_z_ = &store.at(prefix + ".W_z");
  cell.w_r_ = &store.at(prefix + ".W_r");
  cell.w_h_ = &store.at(prefix + ".W_h");
  cell.u_z_ = &store.at(prefix + ".U_z");
  cell.u_r_ = &store.at(prefix + ".U_r");
  cell.u_h_ = &store.at(prefix + ".U_h");
  cell.b_z_ = &store.at(prefix + ".b_z");
  cell.b_r_ = &store.at(prefix + ".b_r");
  cell.b_h_ = &store.at(prefix + ".b_h");
  const std::size_t h = cell.hidden_size(), in = cell.input_size();
  for (auto* w : {cell.w_r_, cell.w_h_}) {
    if (w->value.shape() != Shape{h, in}) {
      throw DimensionError(w->name + " has shape " + shape_to_string(w->value.shape()));
    }
  }
  for (auto* u : {cell.u_z_, cell.u_r_, cell.u_h_}) {
    if (u->value.shape() != Shape{h, h}) {
      throw DimensionError(u->name + " has shape " + shape_to_string(u->value.shape()));
    }
  }
  for (auto* b : {cell.b_z_, cell.b_r_, cell.b_h_}) {
    if (b->value.shape() != Shape{h}) {
      throw DimensionError(b->name + " has shape " + shape_to_string(b->value.shape()));
    }
  }
  return cell;
}

Var GruCell::step(Graph& g, Var x, Var h_prev) const {
  auto z = sigmoid(add(affine(g.param(*w_z_), x, g.param(*b_z_)),
                       matvec(g.param(*u_z_), h_prev)));
  auto r = sigmoid(add(affine(g.param(*w_r_), x, g.param(*b_r_)),
                       matvec(g.param(*u_r_), h_prev)));
  auto candidate = tanh(add(affine(g.param(*w_h_), x, g.param(*b_h_)),
                            matvec(g.param(*u_h_), mul(r, h_prev))));
  return add(mul(one_minus(z), h_prev), mul(z, candidate));
}

std::vector<Parameter*> GruCell::parameters() const {
  return {w_z_, w_r_, w_h_, u_z_, u_r_, u_h_, b_z_, b_r_, b_h_};
}

BiGru::BiGru(GruCell forward, GruCell backward)
    : forward_(forward), backward_(backward) {
  if (forward_.input_size() != backward_.input_size() ||
      forward_.hidden_size() != backward_.hidden_size()) {
    throw DimensionError("Bi-GRU directions disagree on input or hidden size");
  }
}

BiGru BiGru::declare(ParameterStore& store, const std::string& prefix,
                     std::size_t input_size, std::size_t hidden_size,
                     std::mt19937_64& rng) {
  auto fwd = GruCell::declare(store, prefix + ".fwd", input_size, hidden_size, rng);
  auto bwd = GruCell::declare(store, prefix + ".bwd", input_size, hidden_size, rng);
  return BiGru(fwd, bwd);
}

BiGru BiGru::bind(ParameterStore& store, const std::string& prefix) {
  return BiGru(GruCell::bind(store, prefix + ".fwd"), GruCell::bind(store, prefix + ".bwd"));
}

BiStates BiGru::run(Graph& g, std::span<const Var> inputs) const {
  if (inputs.empty()) throw ContractError("Bi-GRU needs at least one input step");
  const std::size_t n = inputs.size();
  BiStates states;
  states.forward.reserve(n);
  states.backward.resize(n);
  auto h = g.constant(Tensor({hidden_size()}));
  for (std::size_t i = 0; i < n; ++i) {
    h = forward_.step(g, inputs[i], h);
    states.forward.push_back(h);
  }
  h = g.constant(Tensor({hidden_size()}));
  for (std::size_t i = n; i-- > 0;) {
    h = backward_.step(g, inputs[i], h);
    states.backward[i] = h;
  }
  return states;
}

std::vector<Parameter*> BiGru::parameters() const {
  auto out = forward_.parameters();
  auto b = backward_.parameters();
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

Var char_encode(Graph& g, const BiGru& char_gru, std::span<const Var> char_embeddings) {
  if (char_embeddings.empty()) throw ContractError("char_encode: empty token");
  auto states = char_gru.run(g, char_embeddings);
  return concat({states.forward.back(), states.backward.front()});
}

std::vector<Var> sentence_encode(Graph& g, const BiGru& word_gru,
                                 std::span<const Var> token_representations) {
  if (token_representations.empty()) {
    throw ContractError("sentence_encode: empty sentence");
  }
  auto states = word_gru.run(g, token_representations);
  std::vector<Var> out;
  out.reserve(token_representations.size());
  for (std::size_t i = 0; i < token_representations.size(); ++i) {
    out.push_back(concat({states.forward[i], states.backward[i]}));
  }
  return out;
}

TextEncoder::TextEncoder(WordTable words, CharTable chars, BiGru char_gru, BiGru word_gru)
    : words_(std::move(words)),
      chars_(std::move(chars)),
      char_gru_(char_gru),
      word_gru_(word_gru) {
  if (char_gru_.input_size() != chars_.dim()) {
    throw DimensionError("char Bi-GRU input size " + std::to_string(char_gru_.input_size()) +
                         " does not match char embedding size " +
                         std::to_string(chars_.dim()));
  }
  if (word_gru_.input_size() != token_dim()) {
    throw DimensionError("word Bi-GRU input size " + std::to_string(word_gru_.input_size()) +
                         " does not match token representation size " +
                         std::to_string(token_dim()));
  }
}

Var TextEncoder::token_represent(Graph& g, std::string_view token,
                                 const EmbeddingDropout& dropout) const {
  auto word = dropout.apply(words_.embed(g, token), "word_embedding");
  auto chars = chars_.embed(g, token);
  for (auto& c : chars) c = dropout.apply(c, "char_embedding");
  return concat({word, char_encode(g, char_gru_, chars)});
}

std::vector<Var> TextEncoder::encode(Graph& g, std::span<const std::string> tokens,
                                     const EmbeddingDropout& dropout) const {
  if (tokens.empty()) throw ContractError("cannot encode an empty sentence");
  std::vector<Var> reps;
  reps.reserve(tokens.size());
  for (const auto& t : tokens) reps.push_back(token_represent(g, t, dropout));
  return sentence_encode(g, word_gru_, reps);
}

}  // namespace trimod
