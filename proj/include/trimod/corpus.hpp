#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "trimod/labels.hpp"
#include "trimod/tensor.hpp"

namespace trimod {

/// One annotated social-media post.
struct Post {
  std::vector<std::string> tokens;
  /// Empty for unannotated prediction input; otherwise one tag per token.
  std::vector<Tag> tags;
  std::optional<std::string> image_id;
  /// Hashtag tokens with the leading '#' removed.
  std::vector<std::string> hashtags;

  bool has_tags() const { return !tags.empty(); }
  friend bool operator==(const Post&, const Post&) = default;
};

/// Hashtags of a token sequence: every token that starts with '#', has
/// something after it, and contains no whitespace.
std::vector<std::string> extract_hashtags(const std::vector<std::string>& tokens);

/// Corpus text format:
///
///   # img: <image_id>        optional, before the first token of a post
///   <token>\t<tag>           one line per token; tag column optional
///                            (extra tab-separated columns are ignored)
///   <blank line>             separates posts
std::vector<Post> parse_corpus(std::istream& in, const std::string& source = "<stream>");
std::vector<Post> parse_corpus(const std::filesystem::path& path);

/// Writes one post in corpus format (no trailing blank line).
void write_post(std::ostream& out, const Post& post);
void write_corpus(std::ostream& out, const std::vector<Post>& posts);
std::string serialize_post(const Post& post);

/// Precomputed per-image feature vectors of a fixed dimension.
class VisualFeatureStore {
 public:
  explicit VisualFeatureStore(std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  bool contains(const std::string& id) const { return vectors_.contains(id); }

  /// Replaces any existing entry (with a warning).
  void insert(const std::string& id, std::vector<double> values);
  /// Unknown ids yield the zero vector and log a warning.
  Tensor lookup(const std::string& id) const;

 private:
  std::size_t dim_;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

/// File format: first line `dim <d>`, then `<image_id> <v_1> ... <v_d>` per line.
VisualFeatureStore load_visual_features(std::istream& in,
                                        const std::string& source = "<stream>");
VisualFeatureStore load_visual_features(const std::filesystem::path& path);

/// Entity counts per type.
struct CorpusStats {
  std::array<std::size_t, kNumEntityTypes> counts{};

  std::size_t of(EntityType t) const { return counts[index_of(t)]; }
  std::size_t total() const;
};

/// Posts without tags are skipped.
CorpusStats corpus_stats(const std::vector<Post>& posts);

/// Deterministic shuffle of post indices under `seed`, then contiguous
/// chunks of `batch_size`; the final partial batch is kept.
std::vector<std::vector<std::size_t>> split_batches(std::size_t num_posts,
                                                    std::size_t batch_size,
                                                    std::uint64_t seed);

/// Reads one word per line, skipping blank lines.
std::vector<std::string> load_wordlist(const std::filesystem::path& path);

}  // namespace trimod
