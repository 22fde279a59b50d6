#pragma once

#include <filesystem>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "trimod/autograd.hpp"
#include "trimod/text.hpp"

namespace trimod {

/// Contents of a textual word-vector file:
///   <vocab_size> <dim>
///   <word> <dim floats>
struct WordVectors {
  std::size_t dim = 0;
  std::vector<std::string> words;
  /// words.size() x dim, row-major.
  std::vector<double> values;
};

WordVectors read_word_vectors(std::istream& in, const std::string& source = "<stream>");
WordVectors read_word_vectors(const std::filesystem::path& path);

/// Uniform(-0.25, 0.25) initializer used for every randomly initialized
/// embedding row.
Tensor random_embedding_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng);

/// Word lookup table. Lookup falls back exact -> ASCII-lowercase -> unknown row.
class WordTable {
 public:
  WordTable(Vocabulary vocab, Parameter& matrix);

  /// Declares `name` in `store` with pretrained rows copied in, unknown and
  /// `extra_words` rows drawn from the embedding initializer. Extra words
  /// already resolvable through the lowercase fallback are not added.
  static WordTable create(ParameterStore& store, const std::string& name,
                          const WordVectors* pretrained,
                          const std::vector<std::string>& extra_words, std::size_t dim,
                          std::mt19937_64& rng);

  std::size_t lookup(std::string_view token) const;
  Var embed(Graph& g, std::string_view token) const;

  std::size_t dim() const { return matrix_->value.dim(1); }
  const Vocabulary& vocabulary() const { return vocab_; }
  Parameter& matrix() const { return *matrix_; }

 private:
  Vocabulary vocab_;
  Parameter* matrix_;
};

/// Reads a word-vector file into a new table named `name`: one row per file
/// word plus the unknown row.
WordTable load_word_vectors(const std::filesystem::path& path, ParameterStore& store,
                            std::mt19937_64& rng, const std::string& name = "word.embed");

/// Character lookup table over UTF-8 code points.
class CharTable {
 public:
  CharTable(Vocabulary alphabet, Parameter& matrix);

  static CharTable create(ParameterStore& store, const std::string& name,
                          const std::vector<std::string>& words, std::size_t dim,
                          std::mt19937_64& rng);

  std::size_t lookup(std::string_view character) const { return alphabet_.find(character); }
  /// One embedding per code point. Throws ContractError on an empty token.
  std::vector<Var> embed(Graph& g, std::string_view token) const;

  std::size_t dim() const { return matrix_->value.dim(1); }
  const Vocabulary& alphabet() const { return alphabet_; }
  Parameter& matrix() const { return *matrix_; }

 private:
  Vocabulary alphabet_;
  Parameter* matrix_;
};

}  // namespace trimod
