#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace trimod {

/// Splits UTF-8 text into code points, each returned as its byte sequence.
/// Malformed bytes are passed through one byte at a time.
std::vector<std::string> utf8_chars(std::string_view text);

/// Lowercases ASCII letters only; other bytes are untouched.
std::string ascii_lower(std::string_view text);

std::string_view trim(std::string_view text);
std::vector<std::string_view> split_whitespace(std::string_view text);

/// String-to-row mapping with a reserved unknown entry at row 0.
class Vocabulary {
 public:
  static constexpr std::string_view kUnknown = "<unk>";
  static constexpr std::size_t kUnknownIndex = 0;

  Vocabulary();
  /// `entries` must start with kUnknown; duplicates are rejected.
  explicit Vocabulary(std::vector<std::string> entries);

  /// Appends if absent; returns the row either way.
  std::size_t add(std::string_view entry);
  /// Exact match or kUnknownIndex.
  std::size_t find(std::string_view entry) const;
  bool contains(std::string_view entry) const;

  std::size_t size() const { return entries_.size(); }
  const std::vector<std::string>& entries() const { return entries_; }

 private:
  std::vector<std::string> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace trimod
