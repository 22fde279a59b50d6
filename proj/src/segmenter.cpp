#include "trimod/segmenter.hpp"

#include <cmath>
#include <numeric>

#include "trimod/optimizer.hpp"

namespace trimod {
namespace {

Tensor uniform(Shape shape, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = dist(rng);
  return t;
}

constexpr std::array<const char*, 4> kGates = {"i", "f", "o", "g"};

bool is_upper(const std::string& c) { return c.size() == 1 && c[0] >= 'A' && c[0] <= 'Z'; }
bool is_lower(const std::string& c) { return c.size() == 1 && c[0] >= 'a' && c[0] <= 'z'; }
bool is_digit(const std::string& c) { return c.size() == 1 && c[0] >= '0' && c[0] <= '9'; }
bool is_letter(const std::string& c) { return is_upper(c) || is_lower(c); }

std::vector<std::string> lowered(std::span<const std::string> chars) {
  std::vector<std::string> out;
  out.reserve(chars.size());
  for (const auto& c : chars) out.push_back(ascii_lower(c));
  return out;
}

}  // namespace

// ---- LSTM ------------------------------------------------------------------------

LstmCell LstmCell::declare(ParameterStore& store, const std::string& prefix,
                           std::size_t input_size, std::size_t hidden_size,
                           std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_size));
  for (const char* gate : kGates) {
    store.add(prefix + ".W_" + gate, uniform({hidden_size, input_size}, bound, rng));
    store.add(prefix + ".U_" + gate, uniform({hidden_size, hidden_size}, bound, rng));
    store.add(prefix + ".b_" + gate, Tensor({hidden_size}));
  }
  return bind(store, prefix);
}

LstmCell LstmCell::bind(ParameterStore& store, const std::string& prefix) {
  LstmCell cell;
  for (std::size_t k = 0; k < kGates.size(); ++k) {
    cell.w_[k] = &store.at(prefix + ".W_" + kGates[k]);
    cell.u_[k] = &store.at(prefix + ".U_" + kGates[k]);
    cell.b_[k] = &store.at(prefix + ".b_" + kGates[k]);
  }
  const std::size_t h = cell.hidden_size(), in = cell.input_size();
  for (std::size_t k = 0; k < kGates.size(); ++k) {
    if (cell.w_[k]->value.shape() != Shape{h, in} ||
        cell.u_[k]->value.shape() != Shape{h, h} || cell.b_[k]->value.shape() != Shape{h}) {
      throw DimensionError("LSTM gate '" + std::string(kGates[k]) + "' of " + prefix +
                           " has inconsistent shapes");
    }
  }
  return cell;
}

LstmCell::State LstmCell::initial_state(Graph& g) const {
  return {g.constant(Tensor({hidden_size()})), g.constant(Tensor({hidden_size()}))};
}

LstmCell::State LstmCell::step(Graph& g, Var x, const State& prev) const {
  auto gate = [&](std::size_t k) {
    return add(affine(g.param(*w_[k]), x, g.param(*b_[k])), matvec(g.param(*u_[k]), prev.h));
  };
  auto in = sigmoid(gate(0));
  auto forget = sigmoid(gate(1));
  auto out = sigmoid(gate(2));
  auto candidate = tanh(gate(3));
  auto c = add(mul(forget, prev.c), mul(in, candidate));
  return {mul(out, tanh(c)), c};
}

std::vector<Parameter*> LstmCell::parameters() const {
  std::vector<Parameter*> out;
  for (std::size_t k = 0; k < kGates.size(); ++k) {
    out.push_back(w_[k]);
    out.push_back(u_[k]);
    out.push_back(b_[k]);
  }
  return out;
}

// ---- Segmenter -------------------------------------------------------------------

Segmenter Segmenter::declare(ParameterStore& store, const std::string& prefix,
                             Vocabulary alphabet, const SegmenterDims& dims,
                             std::mt19937_64& rng) {
  const std::size_t d = dims.embed;
  store.add(prefix + ".embed", random_embedding_matrix(alphabet.size(), d, rng));
  store.add(prefix + ".conv.W",
            uniform({dims.filters, 3 * d}, 1.0 / std::sqrt(3.0 * static_cast<double>(d)), rng));
  store.add(prefix + ".conv.b", Tensor({dims.filters}));
  LstmCell::declare(store, prefix + ".lstm.fwd", dims.filters, dims.hidden, rng);
  LstmCell::declare(store, prefix + ".lstm.bwd", dims.filters, dims.hidden, rng);
  const std::size_t dec_in = 2 * dims.hidden + d;
  store.add(prefix + ".out.W",
            uniform({2, dec_in}, 1.0 / std::sqrt(static_cast<double>(dec_in)), rng));
  store.add(prefix + ".out.b", Tensor({2}));
  return bind(store, prefix, std::move(alphabet));
}

Segmenter Segmenter::bind(ParameterStore& store, const std::string& prefix,
                          Vocabulary alphabet) {
  Segmenter s;
  s.alphabet_ = std::move(alphabet);
  s.embed_ = &store.at(prefix + ".embed");
  s.conv_w_ = &store.at(prefix + ".conv.W");
  s.conv_b_ = &store.at(prefix + ".conv.b");
  s.forward_ = LstmCell::bind(store, prefix + ".lstm.fwd");
  s.backward_ = LstmCell::bind(store, prefix + ".lstm.bwd");
  s.out_w_ = &store.at(prefix + ".out.W");
  s.out_b_ = &store.at(prefix + ".out.b");

  const auto d = s.embed_->value.dim(1);
  if (s.embed_->value.dim(0) != s.alphabet_.size()) {
    throw DimensionError("segmenter embedding rows do not match its alphabet");
  }
  if (s.conv_w_->value.shape() != Shape{s.conv_b_->value.size(), 3 * d} ||
      s.forward_.input_size() != s.conv_b_->value.size() ||
      s.out_w_->value.shape() != Shape{2, 2 * s.forward_.hidden_size() + d}) {
    throw DimensionError("segmenter parameter shapes are inconsistent");
  }
  return s;
}

SegmenterDims Segmenter::dims() const {
  return {embed_->value.dim(1), conv_b_->value.size(), forward_.hidden_size()};
}

std::vector<Var> Segmenter::logits(Graph& g, std::span<const std::string> chars) const {
  if (chars.empty()) throw ContractError("segmenter input must be non-empty");
  const std::size_t n = chars.size();
  auto table = g.param(*embed_);
  std::vector<Var> emb;
  emb.reserve(n);
  for (const auto& c : chars) emb.push_back(row(table, alphabet_.find(c)));

  auto pad = g.constant(Tensor({embed_->value.dim(1)}));
  auto conv_w = g.param(*conv_w_);
  auto conv_b = g.param(*conv_b_);
  std::vector<Var> conv;
  conv.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto window = concat({i > 0 ? emb[i - 1] : pad, emb[i], i + 1 < n ? emb[i + 1] : pad});
    conv.push_back(tanh(affine(conv_w, window, conv_b)));
  }

  std::vector<Var> fwd(n), bwd(n);
  auto state = forward_.initial_state(g);
  for (std::size_t i = 0; i < n; ++i) {
    state = forward_.step(g, conv[i], state);
    fwd[i] = state.h;
  }
  state = backward_.initial_state(g);
  for (std::size_t i = n; i-- > 0;) {
    state = backward_.step(g, conv[i], state);
    bwd[i] = state.h;
  }

  auto out_w = g.param(*out_w_);
  auto out_b = g.param(*out_b_);
  std::vector<Var> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(affine(out_w, concat({fwd[i], bwd[i], emb[i]}), out_b));
  }
  return out;
}

Var Segmenter::loss(Graph& g, const SegmentationExample& example) const {
  if (example.chars.size() != example.boundaries.size()) {
    throw ContractError("segmentation example has mismatched lengths");
  }
  auto out = logits(g, example.chars);
  std::vector<Var> terms;
  terms.reserve(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    terms.push_back(softmax_cross_entropy(out[i], example.boundaries[i]));
  }
  return average(std::span<const Var>(terms));
}

std::vector<double> Segmenter::boundary_probabilities(std::string_view text) const {
  const auto chars = lowered(utf8_chars(text));
  Graph g;
  std::vector<double> probs;
  for (const auto& l : logits(g, chars)) {
    const auto& v = l.value();
    // softmax over two classes, class 1 = space
    probs.push_back(1.0 / (1.0 + std::exp(v[0] - v[1])));
  }
  return probs;
}

std::vector<std::string> Segmenter::segment(std::string_view hashtag) const {
  if (hashtag.empty()) return {};
  const auto probs = boundary_probabilities(hashtag);
  return split_at_boundaries(hashtag, probs);
}

std::vector<Parameter*> Segmenter::parameters() const {
  std::vector<Parameter*> out{embed_, conv_w_, conv_b_};
  for (auto* p : forward_.parameters()) out.push_back(p);
  for (auto* p : backward_.parameters()) out.push_back(p);
  out.push_back(out_w_);
  out.push_back(out_b_);
  return out;
}

// ---- free functions --------------------------------------------------------------

std::vector<std::string> split_at_boundaries(std::string_view text,
                                             std::span<const double> probabilities) {
  const auto chars = utf8_chars(text);
  if (probabilities.size() != chars.size()) {
    throw DimensionError("split_at_boundaries: " + std::to_string(probabilities.size()) +
                         " probabilities for " + std::to_string(chars.size()) + " characters");
  }
  std::vector<std::string> words;
  std::string current;
  for (std::size_t i = 0; i < chars.size(); ++i) {
    current += chars[i];
    if (i + 1 < chars.size() && probabilities[i] > 0.5) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

std::vector<std::string> heuristic_segment(std::string_view hashtag) {
  const auto chars = utf8_chars(hashtag);
  std::vector<std::string> words;
  std::string current;
  for (std::size_t i = 0; i < chars.size(); ++i) {
    if (i > 0) {
      const auto& prev = chars[i - 1];
      const auto& cur = chars[i];
      const bool acronym_end =
          is_upper(prev) && is_upper(cur) && i + 1 < chars.size() && is_lower(chars[i + 1]);
      const bool split = (is_lower(prev) && is_upper(cur)) ||
                         (is_letter(prev) && is_digit(cur)) ||
                         (is_digit(prev) && is_letter(cur)) || acronym_end;
      if (split && !current.empty()) {
        words.push_back(std::move(current));
        current.clear();
      }
    }
    current += chars[i];
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

std::vector<SegmentationExample> make_synthetic_pairs(const std::vector<std::string>& wordlist,
                                                      std::size_t count, std::uint64_t seed) {
  if (wordlist.empty()) throw ContractError("make_synthetic_pairs: empty word list");
  if (count == 0) throw ContractError("make_synthetic_pairs: count must be at least 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_word(0, wordlist.size() - 1);
  std::uniform_int_distribution<int> pick_len(2, 4);
  std::vector<SegmentationExample> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    SegmentationExample ex;
    const int words = pick_len(rng);
    for (int w = 0; w < words; ++w) {
      const auto chars = utf8_chars(ascii_lower(wordlist[pick_word(rng)]));
      for (std::size_t i = 0; i < chars.size(); ++i) {
        ex.chars.push_back(chars[i]);
        ex.boundaries.push_back(i + 1 == chars.size() ? 1 : 0);
      }
    }
    if (!ex.boundaries.empty()) ex.boundaries.back() = 0;
    out.push_back(std::move(ex));
  }
  return out;
}

Vocabulary segmenter_alphabet(const std::vector<std::string>& wordlist) {
  Vocabulary alphabet;
  for (const auto& w : wordlist) {
    for (const auto& c : utf8_chars(ascii_lower(w))) alphabet.add(c);
  }
  return alphabet;
}

SegmenterTrainReport train_segmenter(Segmenter& model,
                                     const std::vector<SegmentationExample>& examples,
                                     const SegmenterTrainConfig& config) {
  if (examples.empty()) throw ContractError("train_segmenter: no examples");
  const auto params = model.parameters();
  for (auto* p : params) p->zero_grad();
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  SgdOptions sgd;
  sgd.learning_rate = config.learning_rate;
  sgd.clip_norm = config.clip_norm;

  SegmenterTrainReport report;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (auto idx : order) {
      Graph g;
      auto loss = model.loss(g, examples[idx]);
      total += loss.item();
      g.backward(loss);
      sgd_step(params, sgd);
    }
    report.epoch_loss.push_back(total / static_cast<double>(examples.size()));
    report.epoch_accuracy.push_back(boundary_accuracy(model, examples));
  }
  return report;
}

double boundary_accuracy(const Segmenter& model,
                         const std::vector<SegmentationExample>& examples) {
  std::size_t correct = 0, total = 0;
  for (const auto& ex : examples) {
    std::string text;
    for (const auto& c : ex.chars) text += c;
    const auto probs = model.boundary_probabilities(text);
    for (std::size_t i = 0; i < probs.size(); ++i) {
      correct += (probs[i] > 0.5) == (ex.boundaries[i] == 1);
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

Var hashtag_feature(Graph& g, std::span<const std::string> hashtag_words,
                    const WordTable& words) {
  if (hashtag_words.empty()) return g.constant(Tensor({words.dim()}));
  std::vector<Var> rows;
  rows.reserve(hashtag_words.size());
  for (const auto& w : hashtag_words) rows.push_back(words.embed(g, w));
  return average(std::span<const Var>(rows));
}

}  // namespace trimod
