#include "trimod/embeddings.hpp"

#include <spdlog/spdlog.h>

#include <charconv>
#include <fstream>
#include <unordered_map>

namespace trimod {
namespace {

std::size_t parse_count(std::string_view text, const std::string& where) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError(where + ": invalid integer '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

WordVectors read_word_vectors(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  WordVectors out;
  std::size_t declared = 0;
  bool header = false;
  std::unordered_map<std::string, std::size_t> seen;
  while (std::getline(in, line)) {
    ++line_no;
    const auto where = source + ":" + std::to_string(line_no);
    const auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    if (!header) {
      if (fields.size() != 2) throw ParseError(where + ": expected '<vocab_size> <dim>'");
      declared = parse_count(fields[0], where);
      out.dim = parse_count(fields[1], where);
      if (out.dim == 0) throw ParseError(where + ": dimension must be positive");
      header = true;
      continue;
    }
    if (fields.size() != out.dim + 1) {
      throw ParseError(where + ": expected " + std::to_string(out.dim) +
                       " values, got " + std::to_string(fields.size() - 1));
    }
    std::vector<double> row;
    row.reserve(out.dim);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      double v = 0.0;
      const auto f = fields[k];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw ParseError(where + ": invalid number '" + std::string(f) + "'");
      }
      row.push_back(v);
    }
    const std::string word(fields[0]);
    if (auto it = seen.find(word); it != seen.end()) {
      spdlog::warn("{}: duplicate word '{}'; keeping the last vector", where, word);
      std::copy(row.begin(), row.end(),
                out.values.begin() + static_cast<std::ptrdiff_t>(it->second * out.dim));
      continue;
    }
    seen.emplace(word, out.words.size());
    out.words.push_back(word);
    out.values.insert(out.values.end(), row.begin(), row.end());
  }
  if (!header) throw ParseError(source + ": missing '<vocab_size> <dim>' header");
  if (declared != out.words.size()) {
    spdlog::warn("{}: header declares {} words but {} were read", source, declared,
                 out.words.size());
  }
  return out;
}

WordVectors read_word_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  return read_word_vectors(in, path.string());
}

Tensor random_embedding_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-0.25, 0.25);
  Tensor t({rows, cols});
  for (auto& v : t.values()) v = dist(rng);
  return t;
}

WordTable::WordTable(Vocabulary vocab, Parameter& matrix)
    : vocab_(std::move(vocab)), matrix_(&matrix) {
  const auto& shape = matrix.value.shape();
  if (shape.size() != 2 || shape[0] != vocab_.size()) {
    throw DimensionError("word table '" + matrix.name + "' has shape " +
                         shape_to_string(shape) + " for " +
                         std::to_string(vocab_.size()) + " entries");
  }
}

WordTable WordTable::create(ParameterStore& store, const std::string& name,
                            const WordVectors* pretrained,
                            const std::vector<std::string>& extra_words, std::size_t dim,
                            std::mt19937_64& rng) {
  if (pretrained && pretrained->dim != dim) {
    throw DimensionError("word vectors have dimension " + std::to_string(pretrained->dim) +
                         " but the model expects " + std::to_string(dim));
  }
  Vocabulary vocab;
  if (pretrained) {
    for (const auto& w : pretrained->words) vocab.add(w);
  }
  for (const auto& w : extra_words) {
    if (vocab.contains(w) || vocab.contains(ascii_lower(w))) continue;
    vocab.add(w);
  }
  Tensor matrix = random_embedding_matrix(vocab.size(), dim, rng);
  if (pretrained) {
    for (std::size_t i = 0; i < pretrained->words.size(); ++i) {
      const auto r = vocab.find(pretrained->words[i]);
      std::copy_n(pretrained->values.data() + i * dim, dim, matrix.data() + r * dim);
    }
  }
  auto& param = store.add(name, std::move(matrix));
  return WordTable(std::move(vocab), param);
}

std::size_t WordTable::lookup(std::string_view token) const {
  if (auto idx = vocab_.find(token); idx != Vocabulary::kUnknownIndex) return idx;
  return vocab_.find(ascii_lower(token));
}

Var WordTable::embed(Graph& g, std::string_view token) const {
  return row(g.param(*matrix_), lookup(token));
}

WordTable load_word_vectors(const std::filesystem::path& path, ParameterStore& store,
                            std::mt19937_64& rng, const std::string& name) {
  const auto vectors = read_word_vectors(path);
  return WordTable::create(store, name, &vectors, {}, vectors.dim, rng);
}

CharTable::CharTable(Vocabulary alphabet, Parameter& matrix)
    : alphabet_(std::move(alphabet)), matrix_(&matrix) {
  const auto& shape = matrix.value.shape();
  if (shape.size() != 2 || shape[0] != alphabet_.size()) {
    throw DimensionError("char table '" + matrix.name + "' has shape " +
                         shape_to_string(shape) + " for " +
                         std::to_string(alphabet_.size()) + " entries");
  }
}

CharTable CharTable::create(ParameterStore& store, const std::string& name,
                            const std::vector<std::string>& words, std::size_t dim,
                            std::mt19937_64& rng) {
  Vocabulary alphabet;
  for (const auto& w : words) {
    for (const auto& c : utf8_chars(w)) alphabet.add(c);
  }
  auto& param = store.add(name, random_embedding_matrix(alphabet.size(), dim, rng));
  return CharTable(std::move(alphabet), param);
}

std::vector<Var> CharTable::embed(Graph& g, std::string_view token) const {
  if (token.empty()) throw ContractError("cannot embed the characters of an empty token");
  auto table = g.param(*matrix_);
  std::vector<Var> out;
  for (const auto& c : utf8_chars(token)) out.push_back(row(table, alphabet_.find(c)));
  return out;
}

}  // namespace trimod
