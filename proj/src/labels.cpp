#include "trimod/labels.hpp"

#include <stdexcept>
#include <string>

namespace trimod {
namespace {

constexpr std::array<std::string_view, kNumTags> kTagNames = {
    "O", "B-PER", "I-PER", "B-LOC", "I-LOC", "B-ORG", "I-ORG", "B-MISC", "I-MISC"};

}  // namespace

std::string_view tag_name(Tag t) { return kTagNames[index_of(t)]; }

std::optional<Tag> parse_tag(std::string_view name) {
  for (std::size_t i = 0; i < kNumTags; ++i) {
    if (kTagNames[i] == name) return static_cast<Tag>(i);
  }
  return std::nullopt;
}

Tag tag_from_index(std::size_t index) {
  if (index >= kNumTags) {
    throw std::out_of_range("tag index " + std::to_string(index) + " out of range");
  }
  return static_cast<Tag>(index);
}

std::string_view entity_code(EntityType t) {
  static constexpr std::array<std::string_view, kNumEntityTypes> codes = {
      "PER", "LOC", "ORG", "MISC"};
  return codes[index_of(t)];
}

std::string_view entity_long_name(EntityType t) {
  static constexpr std::array<std::string_view, kNumEntityTypes> names = {
      "Person", "Location", "Organization", "Misc"};
  return names[index_of(t)];
}

bool transition_allowed(std::optional<Tag> prev, Tag next) {
  if (!is_inside(next)) return true;
  if (!prev || *prev == Tag::O) return false;
  return entity_of(*prev) == entity_of(next);
}

bool is_well_formed(std::span<const Tag> tags) {
  std::optional<Tag> prev;
  for (Tag t : tags) {
    if (!transition_allowed(prev, t)) return false;
    prev = t;
  }
  return true;
}

std::vector<Tag> repair_bio2(std::span<const Tag> tags) {
  std::vector<Tag> out(tags.begin(), tags.end());
  std::optional<Tag> prev;
  for (auto& t : out) {
    if (!transition_allowed(prev, t)) t = begin_tag(*entity_of(t));
    prev = t;
  }
  return out;
}

}  // namespace trimod
