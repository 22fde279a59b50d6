#pragma once

#include <array>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "trimod/bundle.hpp"
#include "trimod/corpus.hpp"
#include "trimod/crf.hpp"
#include "trimod/encoders.hpp"
#include "trimod/fusion.hpp"
#include "trimod/segmenter.hpp"

namespace trimod {

/// A post resolved against a model: tokens, gold label indices (empty when
/// unannotated), segmented hashtag words and the visual vector.
struct PreparedPost {
  std::vector<std::string> tokens;
  std::vector<std::size_t> gold;
  std::vector<std::string> hashtag_words;
  Tensor visual;
};

struct Prediction {
  std::vector<Tag> tags;
  /// Attention weights per token in text, visual, hashtag order. Disabled
  /// modalities report 0.
  std::vector<std::array<double, kNumModalities>> attention;
  double score = 0.0;
};

/// Text encoder, hashtag and visual features, attention fusion, emission
/// head and CRF, all bound to the parameters of one ModelBundle.
class TriModModel {
 public:
  static constexpr std::string_view kWordEmbed = "word.embed";
  static constexpr std::string_view kCharEmbed = "char.embed";
  static constexpr std::string_view kCharGru = "char_gru";
  static constexpr std::string_view kWordGru = "word_gru";
  static constexpr std::string_view kFusion = "fusion";
  static constexpr std::string_view kEmission = "emit";
  static constexpr std::string_view kTransitions = "crf.transitions";
  static constexpr std::string_view kSegmenter = "seg";

  /// Fresh bundle with every parameter initialized from `config.seed`.
  /// The word vocabulary covers the training tokens, their hashtag words and
  /// `segmenter_words`; when `segmenter_words` is non-empty a segmenter over
  /// its alphabet is declared too.
  static ModelBundle initialize(ModelDims dims, const TrainConfig& config,
                                std::span<const Post> train_posts,
                                const WordVectors* pretrained = nullptr,
                                const std::vector<std::string>& segmenter_words = {});

  explicit TriModModel(ModelBundle bundle);
  TriModModel(const TriModModel&) = delete;
  TriModModel& operator=(const TriModModel&) = delete;

  PreparedPost prepare(const Post& post, const VisualFeatureStore* visual = nullptr) const;
  std::vector<PreparedPost> prepare(std::span<const Post> posts,
                                    const VisualFeatureStore* visual = nullptr) const;

  /// Hashtag words via the trained segmenter, or the heuristic without one.
  std::vector<std::string> segment_hashtag(std::string_view hashtag) const;

  /// [n x 9] emission scores. `fused` receives the per-token fusion output.
  Var emissions(Graph& g, const PreparedPost& post, const EmbeddingDropout& dropout = {},
                std::vector<FusedToken>* fused = nullptr) const;
  /// CRF negative log-likelihood of the gold labels (summed over the post).
  Var loss(Graph& g, const PreparedPost& post, const EmbeddingDropout& dropout = {}) const;
  Prediction predict(const PreparedPost& post) const;

  /// Parameters updated by NER training (everything but the segmenter).
  std::vector<Parameter*> trainable_parameters();
  /// Zeroes gradients of the fixed transition entries.
  void mask_fixed_gradients();
  /// Rewrites the fixed transition entries to their forbidden value.
  void restore_fixed_transitions();

  const ModelBundle& bundle() const { return bundle_; }
  ModelBundle& bundle() { return bundle_; }
  const ModelDims& dims() const { return bundle_.dims; }
  const TextEncoder& encoder() const { return *encoder_; }
  const Fusion& fusion() const { return fusion_; }
  const EmissionHead& emission_head() const { return head_; }
  Parameter& transitions() const { return *transitions_; }
  const Segmenter* segmenter() const { return segmenter_ ? &*segmenter_ : nullptr; }
  Segmenter* segmenter() { return segmenter_ ? &*segmenter_ : nullptr; }

 private:
  ModelBundle bundle_;
  std::optional<TextEncoder> encoder_;
  Fusion fusion_;
  EmissionHead head_;
  Parameter* transitions_ = nullptr;
  std::vector<bool> fixed_;
  std::optional<Segmenter> segmenter_;
};

}  // namespace trimod
