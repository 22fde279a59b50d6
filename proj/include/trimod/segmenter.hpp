#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "trimod/autograd.hpp"
#include "trimod/embeddings.hpp"
#include "trimod/text.hpp"

namespace trimod {

/// A space-free character sequence with its word boundaries:
/// boundaries[i] == 1 iff a space follows chars[i].
struct SegmentationExample {
  std::vector<std::string> chars;
  std::vector<std::uint8_t> boundaries;
};

struct SegmenterDims {
  std::size_t embed = 30;
  std::size_t filters = 32;
  std::size_t hidden = 50;
};

struct SegmenterTrainConfig {
  double learning_rate = 0.01;
  std::size_t epochs = 20;
  double clip_norm = 5.0;
  std::uint64_t seed = 7;
};

/// Long short-term memory cell with separate input/forget/output/candidate
/// weights.
class LstmCell {
 public:
  struct State {
    Var h;
    Var c;
  };

  static LstmCell declare(ParameterStore& store, const std::string& prefix,
                          std::size_t input_size, std::size_t hidden_size,
                          std::mt19937_64& rng);
  static LstmCell bind(ParameterStore& store, const std::string& prefix);

  State step(Graph& g, Var x, const State& prev) const;
  State initial_state(Graph& g) const;

  std::size_t input_size() const { return w_[0]->value.dim(1); }
  std::size_t hidden_size() const { return w_[0]->value.dim(0); }
  std::vector<Parameter*> parameters() const;

 private:
  // Gate order: input, forget, output, candidate.
  std::array<Parameter*, 4> w_{};
  std::array<Parameter*, 4> u_{};
  std::array<Parameter*, 4> b_{};
};

/// Character-level boundary model for hashtags:
/// embeddings -> width-3 convolution (tanh) -> BiLSTM -> affine decoder over
/// [encoder state; character embedding] -> 2 logits (no-space, space).
class Segmenter {
 public:
  static Segmenter declare(ParameterStore& store, const std::string& prefix,
                           Vocabulary alphabet, const SegmenterDims& dims,
                           std::mt19937_64& rng);
  static Segmenter bind(ParameterStore& store, const std::string& prefix,
                        Vocabulary alphabet);

  /// Logits per position for already-lowercased characters.
  std::vector<Var> logits(Graph& g, std::span<const std::string> chars) const;
  /// Mean per-position cross-entropy.
  Var loss(Graph& g, const SegmentationExample& example) const;

  /// P(space after character i) for each code point of `text`.
  std::vector<double> boundary_probabilities(std::string_view text) const;
  /// Splits after every position whose boundary probability exceeds 0.5.
  std::vector<std::string> segment(std::string_view hashtag) const;

  const Vocabulary& alphabet() const { return alphabet_; }
  SegmenterDims dims() const;
  std::vector<Parameter*> parameters() const;

 private:
  Vocabulary alphabet_;
  Parameter* embed_ = nullptr;
  Parameter* conv_w_ = nullptr;
  Parameter* conv_b_ = nullptr;
  LstmCell forward_;
  LstmCell backward_;
  Parameter* out_w_ = nullptr;
  Parameter* out_b_ = nullptr;
};

/// Splits `text` after each code point i < n-1 with probabilities[i] > 0.5.
std::vector<std::string> split_at_boundaries(std::string_view text,
                                             std::span<const double> probabilities);

/// Rule-based fallback: splits lower->Upper, letter<->digit, and before the
/// last capital of an acronym that starts a capitalized word (NYCMarathon ->
/// NYC Marathon).
std::vector<std::string> heuristic_segment(std::string_view hashtag);

/// Lowercased concatenations of 2-4 words drawn uniformly from `wordlist`.
/// The final boundary is always 0.
std::vector<SegmentationExample> make_synthetic_pairs(const std::vector<std::string>& wordlist,
                                                      std::size_t count, std::uint64_t seed);

/// Distinct lowercased code points of a word list, for a segmenter alphabet.
Vocabulary segmenter_alphabet(const std::vector<std::string>& wordlist);

struct SegmenterTrainReport {
  std::vector<double> epoch_loss;
  /// Per-character boundary accuracy on the training examples after each epoch.
  std::vector<double> epoch_accuracy;
};

/// Per-example SGD on the mean per-position cross-entropy.
SegmenterTrainReport train_segmenter(Segmenter& model,
                                     const std::vector<SegmentationExample>& examples,
                                     const SegmenterTrainConfig& config);

/// Fraction of positions whose thresholded prediction matches the label.
double boundary_accuracy(const Segmenter& model,
                         const std::vector<SegmentationExample>& examples);

/// Mean of the word embeddings of every segmented hashtag word; the zero
/// vector when there are none.
Var hashtag_feature(Graph& g, std::span<const std::string> hashtag_words,
                    const WordTable& words);

}  // namespace trimod
