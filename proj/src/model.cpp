#include "trimod/model.hpp"

#include <spdlog/spdlog.h>

namespace trimod {
namespace {

std::string name(std::string_view s) { return std::string(s); }

}  // namespace

ModelBundle TriModModel::initialize(ModelDims dims, const TrainConfig& config,
                                    std::span<const Post> train_posts,
                                    const WordVectors* pretrained,
                                    const std::vector<std::string>& segmenter_words) {
  config.validate();
  if (pretrained && pretrained->dim != dims.word_dim) {
    spdlog::info("word vectors have dimension {}; using it instead of {}", pretrained->dim,
                 dims.word_dim);
    dims.word_dim = pretrained->dim;
  }
  dims.validate();

  std::vector<std::string> words;
  for (const auto& post : train_posts) {
    words.insert(words.end(), post.tokens.begin(), post.tokens.end());
    for (const auto& tag : post.hashtags) {
      auto parts = heuristic_segment(tag);
      words.insert(words.end(), parts.begin(), parts.end());
    }
  }
  words.insert(words.end(), segmenter_words.begin(), segmenter_words.end());

  ModelBundle bundle;
  bundle.dims = dims;
  bundle.config = config;
  auto& store = bundle.params;
  std::mt19937_64 rng(config.seed);

  auto word_table =
      WordTable::create(store, name(kWordEmbed), pretrained, words, dims.word_dim, rng);
  auto char_table = CharTable::create(store, name(kCharEmbed), words, dims.char_embed_dim, rng);
  BiGru::declare(store, name(kCharGru), dims.char_embed_dim, dims.char_hidden, rng);
  BiGru::declare(store, name(kWordGru), dims.token_dim(), dims.word_hidden, rng);
  Fusion::declare(store, name(kFusion), dims.fused_dim,
                  {dims.text_dim(), dims.visual_dim, dims.word_dim}, rng);
  EmissionHead::declare(store, name(kEmission), dims.fused_dim, kNumTags, rng);
  store.add(name(kTransitions), crf::initial_transitions(kNumTags, dims.bio_constraints, rng));

  bundle.word_vocab = word_table.vocabulary().entries();
  bundle.char_vocab = char_table.alphabet().entries();
  if (!segmenter_words.empty()) {
    auto alphabet = segmenter_alphabet(segmenter_words);
    bundle.segmenter_vocab = alphabet.entries();
    Segmenter::declare(store, name(kSegmenter), std::move(alphabet), dims.segmenter, rng);
  }
  return bundle;
}

TriModModel::TriModModel(ModelBundle bundle) : bundle_(std::move(bundle)) {
  auto& store = bundle_.params;
  const auto& dims = bundle_.dims;
  WordTable words(Vocabulary(bundle_.word_vocab), store.at(kWordEmbed));
  CharTable chars(Vocabulary(bundle_.char_vocab), store.at(kCharEmbed));
  auto char_gru = BiGru::bind(store, name(kCharGru));
  auto word_gru = BiGru::bind(store, name(kWordGru));
  encoder_.emplace(std::move(words), std::move(chars), std::move(char_gru), std::move(word_gru));
  fusion_ = Fusion::bind(store, name(kFusion));
  head_ = EmissionHead::bind(store, name(kEmission));
  transitions_ = &store.at(kTransitions);

  if (encoder_->words().dim() != dims.word_dim || encoder_->chars().dim() != dims.char_embed_dim ||
      encoder_->char_gru().hidden_size() != dims.char_hidden ||
      encoder_->word_gru().hidden_size() != dims.word_hidden ||
      encoder_->word_gru().input_size() != dims.token_dim()) {
    throw DimensionError("text encoder parameters do not match the recorded dimensions");
  }
  if (fusion_.fused_dim() != dims.fused_dim ||
      fusion_.input_dim(Modality::Text) != dims.text_dim() ||
      fusion_.input_dim(Modality::Visual) != dims.visual_dim ||
      fusion_.input_dim(Modality::Hashtag) != dims.word_dim) {
    throw DimensionError("fusion parameters do not match the recorded dimensions");
  }
  if (head_.input_dim() != dims.fused_dim || head_.num_labels() != kNumTags) {
    throw DimensionError("emission head must map " + std::to_string(dims.fused_dim) + " -> " +
                         std::to_string(kNumTags));
  }
  if (transitions_->value.shape() != Shape{kNumTags + 2, kNumTags + 2}) {
    throw DimensionError("transition matrix has shape " +
                         shape_to_string(transitions_->value.shape()));
  }
  fixed_ = crf::fixed_transition_mask(kNumTags, dims.bio_constraints);
  restore_fixed_transitions();

  if (bundle_.has_segmenter()) {
    segmenter_.emplace(
        Segmenter::bind(store, name(kSegmenter), Vocabulary(bundle_.segmenter_vocab)));
  }
}

std::vector<std::string> TriModModel::segment_hashtag(std::string_view hashtag) const {
  return segmenter_ ? segmenter_->segment(hashtag) : heuristic_segment(hashtag);
}

PreparedPost TriModModel::prepare(const Post& post, const VisualFeatureStore* visual) const {
  if (post.tokens.empty()) throw ContractError("cannot prepare an empty post");
  PreparedPost out;
  out.tokens = post.tokens;
  if (post.has_tags()) {
    const auto tags = dims().bio_constraints ? repair_bio2(post.tags) : post.tags;
    for (Tag t : tags) out.gold.push_back(index_of(t));
  }
  for (const auto& tag : post.hashtags) {
    auto words = segment_hashtag(tag);
    out.hashtag_words.insert(out.hashtag_words.end(), words.begin(), words.end());
  }
  if (visual && visual->dim() != dims().visual_dim) {
    throw DimensionError("visual features have dimension " + std::to_string(visual->dim()) +
                         " but the model expects " + std::to_string(dims().visual_dim));
  }
  out.visual = (visual && post.image_id) ? visual->lookup(*post.image_id)
                                         : Tensor({dims().visual_dim});
  return out;
}

std::vector<PreparedPost> TriModModel::prepare(std::span<const Post> posts,
                                               const VisualFeatureStore* visual) const {
  std::vector<PreparedPost> out;
  out.reserve(posts.size());
  for (const auto& p : posts) out.push_back(prepare(p, visual));
  return out;
}

Var TriModModel::emissions(Graph& g, const PreparedPost& post, const EmbeddingDropout& dropout,
                           std::vector<FusedToken>* fused) const {
  const auto text = encoder_->encode(g, post.tokens, dropout);
  std::vector<ModalFeature> post_features;
  if (dims().use_visual) post_features.push_back({Modality::Visual, g.constant(post.visual)});
  if (dims().use_hashtags) {
    post_features.push_back(
        {Modality::Hashtag, hashtag_feature(g, post.hashtag_words, encoder_->words())});
  }
  auto tokens = fusion_.fuse_post(g, text, post_features);
  std::vector<Var> vectors;
  vectors.reserve(tokens.size());
  for (const auto& t : tokens) vectors.push_back(t.vector);
  auto scores = head_.emissions(g, vectors);
  if (fused) *fused = std::move(tokens);
  return scores;
}

Var TriModModel::loss(Graph& g, const PreparedPost& post, const EmbeddingDropout& dropout) const {
  if (post.gold.size() != post.tokens.size()) {
    throw ContractError("loss needs one gold label per token");
  }
  return crf_nll(emissions(g, post, dropout), g.param(*transitions_), post.gold);
}

Prediction TriModModel::predict(const PreparedPost& post) const {
  Graph g;
  std::vector<FusedToken> fused;
  auto scores = emissions(g, post, {}, &fused);
  auto decoded = crf::viterbi_decode(scores.value(), transitions_->value);
  Prediction out;
  out.score = decoded.score;
  for (auto y : decoded.labels) out.tags.push_back(tag_from_index(y));
  for (const auto& f : fused) {
    std::array<double, kNumModalities> w{};
    std::size_t k = 0;
    w[0] = f.weights[k++];
    if (dims().use_visual) w[1] = f.weights[k++];
    if (dims().use_hashtags) w[2] = f.weights[k++];
    out.attention.push_back(w);
  }
  return out;
}

std::vector<Parameter*> TriModModel::trainable_parameters() {
  const std::string seg_prefix = name(kSegmenter) + ".";
  std::vector<Parameter*> out;
  for (auto& [key, p] : bundle_.params) {
    if (!key.starts_with(seg_prefix)) out.push_back(&p);
  }
  return out;
}

void TriModModel::mask_fixed_gradients() {
  auto& grad = transitions_->grad;
  if (grad.empty()) return;
  for (std::size_t i = 0; i < fixed_.size(); ++i) {
    if (fixed_[i]) grad[i] = 0.0;
  }
}

void TriModModel::restore_fixed_transitions() {
  crf::apply_fixed_transitions(transitions_->value, fixed_);
}

}  // namespace trimod
