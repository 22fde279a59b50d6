#include "trimod/corpus.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "trimod/evaluation.hpp"
#include "trimod/text.hpp"

namespace trimod {
namespace {

constexpr std::string_view kImageHeader = "# img:";

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  return in;
}

std::string location(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line);
}

double parse_double(std::string_view text, const std::string& where) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(where + ": invalid number '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

std::vector<std::string> extract_hashtags(const std::vector<std::string>& tokens) {
  std::vector<std::string> out;
  for (const auto& tok : tokens) {
    if (tok.size() < 2 || tok.front() != '#') continue;
    if (tok.find_first_of(" \t\r\n") != std::string::npos) continue;
    out.push_back(tok.substr(1));
  }
  return out;
}

std::vector<Post> parse_corpus(std::istream& in, const std::string& source) {
  std::vector<Post> posts;
  Post current;
  std::optional<bool> tagged;
  std::size_t line_no = 0;

  auto finish = [&] {
    if (!current.tokens.empty()) {
      current.hashtags = extract_hashtags(current.tokens);
      posts.push_back(std::move(current));
    } else if (current.image_id) {
      throw ParseError(location(source, line_no) + ": image header without tokens");
    }
    current = Post{};
    tagged.reset();
  };

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) {
      finish();
      continue;
    }
    if (current.tokens.empty() && line.starts_with(kImageHeader)) {
      const auto id = trim(std::string_view(line).substr(kImageHeader.size()));
      if (id.empty()) throw ParseError(location(source, line_no) + ": empty image id");
      current.image_id = std::string(id);
      continue;
    }
    const auto tab = line.find('\t');
    const std::string token = line.substr(0, tab);
    if (token.empty()) throw ParseError(location(source, line_no) + ": empty token");
    const bool has_tag = tab != std::string::npos;
    if (tagged && *tagged != has_tag) {
      throw ParseError(location(source, line_no) +
                       ": tag column present on some tokens of a post but not others");
    }
    tagged = has_tag;
    current.tokens.push_back(token);
    if (has_tag) {
      const auto rest = std::string_view(line).substr(tab + 1);
      const auto tag_text = trim(rest.substr(0, rest.find('\t')));
      const auto tag = parse_tag(tag_text);
      if (!tag) {
        throw ParseError(location(source, line_no) + ": unknown tag '" +
                         std::string(tag_text) + "'");
      }
      current.tags.push_back(*tag);
    }
  }
  finish();
  return posts;
}

std::vector<Post> parse_corpus(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_corpus(in, path.string());
}

void write_post(std::ostream& out, const Post& post) {
  if (post.image_id) out << kImageHeader << ' ' << *post.image_id << '\n';
  for (std::size_t i = 0; i < post.tokens.size(); ++i) {
    out << post.tokens[i];
    if (post.has_tags()) out << '\t' << tag_name(post.tags[i]);
    out << '\n';
  }
}

void write_corpus(std::ostream& out, const std::vector<Post>& posts) {
  for (std::size_t i = 0; i < posts.size(); ++i) {
    if (i) out << '\n';
    write_post(out, posts[i]);
  }
}

std::string serialize_post(const Post& post) {
  std::ostringstream out;
  write_post(out, post);
  return out.str();
}

VisualFeatureStore::VisualFeatureStore(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw ContractError("visual feature dimension must be positive");
}

void VisualFeatureStore::insert(const std::string& id, std::vector<double> values) {
  if (values.size() != dim_) {
    throw DimensionError("visual feature '" + id + "' has " +
                         std::to_string(values.size()) + " values, expected " +
                         std::to_string(dim_));
  }
  if (vectors_.contains(id)) {
    spdlog::warn("duplicate visual feature id '{}'; keeping the last one", id);
  }
  vectors_[id] = std::move(values);
}

Tensor VisualFeatureStore::lookup(const std::string& id) const {
  auto it = vectors_.find(id);
  if (it == vectors_.end()) {
    spdlog::warn("no visual features for image '{}'; using zeros", id);
    return Tensor({dim_});
  }
  return Tensor({dim_}, it->second);
}

VisualFeatureStore load_visual_features(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<VisualFeatureStore> store;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    if (!store) {
      if (fields.size() != 2 || fields[0] != "dim") {
        throw ParseError(location(source, line_no) + ": expected header 'dim <d>'");
      }
      const double d = parse_double(fields[1], location(source, line_no));
      if (d < 1 || d != static_cast<double>(static_cast<std::size_t>(d))) {
        throw ParseError(location(source, line_no) + ": invalid dimension");
      }
      store.emplace(static_cast<std::size_t>(d));
      continue;
    }
    if (fields.size() != store->dim() + 1) {
      throw ParseError(location(source, line_no) + ": expected " +
                       std::to_string(store->dim()) + " values, got " +
                       std::to_string(fields.size() - 1));
    }
    std::vector<double> values;
    values.reserve(store->dim());
    for (std::size_t k = 1; k < fields.size(); ++k) {
      values.push_back(parse_double(fields[k], location(source, line_no)));
    }
    store->insert(std::string(fields[0]), std::move(values));
  }
  if (!store) throw ParseError(source + ": missing 'dim <d>' header");
  return std::move(*store);
}

VisualFeatureStore load_visual_features(const std::filesystem::path& path) {
  auto in = open_input(path);
  return load_visual_features(in, path.string());
}

std::size_t CorpusStats::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

CorpusStats corpus_stats(const std::vector<Post>& posts) {
  CorpusStats stats;
  for (const auto& post : posts) {
    if (!post.has_tags()) continue;
    for (const auto& span : extract_spans(post.tags)) ++stats.counts[index_of(span.type)];
  }
  return stats;
}

std::vector<std::vector<std::size_t>> split_batches(std::size_t num_posts,
                                                    std::size_t batch_size,
                                                    std::uint64_t seed) {
  if (batch_size == 0) throw ContractError("batch_size must be at least 1");
  std::vector<std::size_t> order(num_posts);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < num_posts; i += batch_size) {
    const auto end = std::min(num_posts, i + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

std::vector<std::string> load_wordlist(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const auto w = trim(line);
    if (!w.empty()) words.emplace_back(w);
  }
  return words;
}

}  // namespace trimod
