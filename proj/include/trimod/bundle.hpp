#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "trimod/segmenter.hpp"
#include "trimod/tensor.hpp"

namespace trimod {

struct TrainConfig {
  double learning_rate = 0.005;
  double lr_decay = 0.05;
  std::size_t batch_size = 10;
  std::size_t accumulation_steps = 9;
  double dropout = 0.55;
  std::size_t epochs = 200;
  std::uint64_t seed = 1;
  double l1 = 0.0;
  double l2 = 0.0;
  /// <= 0 disables clipping.
  double clip_norm = 5.0;

  /// Throws ContractError naming the offending field.
  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Architecture sizes and switches.
struct ModelDims {
  std::size_t word_dim = 200;
  std::size_t char_embed_dim = 30;
  std::size_t char_hidden = 30;
  std::size_t word_hidden = 150;
  std::size_t fused_dim = 300;
  std::size_t visual_dim = 16;
  SegmenterDims segmenter;
  bool use_visual = true;
  bool use_hashtags = true;
  bool bio_constraints = true;

  std::size_t char_repr_dim() const { return 2 * char_hidden; }
  std::size_t token_dim() const { return word_dim + char_repr_dim(); }
  std::size_t text_dim() const { return 2 * word_hidden; }
  void validate() const;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// `key = value` lines; blank lines and lines starting with '#' are skipped.
KeyValues parse_key_values(std::istream& in, const std::string& source = "<stream>");
KeyValues read_key_values(const std::filesystem::path& path);

KeyValues to_key_values(const TrainConfig& config);
KeyValues to_key_values(const ModelDims& dims);

/// Returns false for an unrecognized key. Throws ParseError on a bad value.
bool apply_key_value(TrainConfig& config, const std::string& key, const std::string& value);
bool apply_key_value(ModelDims& dims, const std::string& key, const std::string& value);

/// Applies every entry to whichever of the two structures recognizes it.
/// Unknown keys throw ParseError.
void apply_config(const KeyValues& entries, TrainConfig& config, ModelDims& dims,
                  const std::string& source = "<config>");

/// Everything needed to rebuild a trained model.
struct ModelBundle {
  static constexpr std::uint32_t kFormatVersion = 1;

  std::uint32_t version = kFormatVersion;
  ModelDims dims;
  TrainConfig config;
  /// Vocabulary entries including the leading unknown entry.
  std::vector<std::string> word_vocab;
  std::vector<std::string> char_vocab;
  /// Empty when the model carries no trained segmenter.
  std::vector<std::string> segmenter_vocab;
  ParameterStore params;
  std::size_t epochs_trained = 0;

  bool has_segmenter() const { return !segmenter_vocab.empty(); }
};

}  // namespace trimod
