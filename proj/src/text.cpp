#include "trimod/text.hpp"

#include <stdexcept>

namespace trimod {

std::vector<std::string> utf8_chars(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if ((lead & 0xE0) == 0xC0) len = 2;
    else if ((lead & 0xF0) == 0xE0) len = 3;
    else if ((lead & 0xF8) == 0xF0) len = 4;
    if (i + len > text.size()) len = 1;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) {
        len = 1;
        break;
      }
    }
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

std::string ascii_lower(std::string_view text) {
  std::string out(text);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string_view trim(std::string_view text) {
  const auto* ws = " \t\r\n";
  const auto first = text.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(ws);
  return text.substr(first, last - first + 1);
}

std::vector<std::string_view> split_whitespace(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ' && text[j] != '\t' && text[j] != '\r') ++j;
    if (j > i) out.push_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{std::string(kUnknown)}) {}

Vocabulary::Vocabulary(std::vector<std::string> entries) {
  if (entries.empty() || entries.front() != kUnknown) {
    throw std::invalid_argument("vocabulary must start with the unknown entry");
  }
  entries_.reserve(entries.size());
  for (auto& e : entries) {
    if (index_.contains(e)) {
      throw std::invalid_argument("duplicate vocabulary entry '" + e + "'");
    }
    index_.emplace(e, entries_.size());
    entries_.push_back(std::move(e));
  }
}

std::size_t Vocabulary::add(std::string_view entry) {
  std::string key(entry);
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  index_.emplace(key, entries_.size());
  entries_.push_back(std::move(key));
  return entries_.size() - 1;
}

std::size_t Vocabulary::find(std::string_view entry) const {
  auto it = index_.find(std::string(entry));
  return it == index_.end() ? kUnknownIndex : it->second;
}

bool Vocabulary::contains(std::string_view entry) const {
  return index_.contains(std::string(entry));
}

}  // namespace trimod
