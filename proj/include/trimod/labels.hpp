#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>
#include <string_view>

namespace trimod {

/// BIO2 label set. The numeric order is the label index used everywhere
/// (emission columns, transition rows, serialized predictions).
enum class Tag : std::uint8_t {
  O = 0,
  B_PER,
  I_PER,
  B_LOC,
  I_LOC,
  B_ORG,
  I_ORG,
  B_MISC,
  I_MISC,
};

inline constexpr std::size_t kNumTags = 9;

enum class EntityType : std::uint8_t { PER = 0, LOC, ORG, MISC };

inline constexpr std::size_t kNumEntityTypes = 4;
inline constexpr std::array<EntityType, kNumEntityTypes> kEntityTypes = {
    EntityType::PER, EntityType::LOC, EntityType::ORG, EntityType::MISC};

constexpr std::size_t index_of(Tag t) { return static_cast<std::size_t>(t); }
constexpr std::size_t index_of(EntityType t) { return static_cast<std::size_t>(t); }

std::string_view tag_name(Tag t);
std::optional<Tag> parse_tag(std::string_view name);
Tag tag_from_index(std::size_t index);

/// "PER", "LOC", ...
std::string_view entity_code(EntityType t);
/// "Person", "Location", ...
std::string_view entity_long_name(EntityType t);

constexpr bool is_begin(Tag t) {
  return t != Tag::O && (index_of(t) % 2 == 1);
}
constexpr bool is_inside(Tag t) {
  return t != Tag::O && (index_of(t) % 2 == 0);
}
/// Entity type of a B-X or I-X tag; nullopt for O.
constexpr std::optional<EntityType> entity_of(Tag t) {
  if (t == Tag::O) return std::nullopt;
  return static_cast<EntityType>((index_of(t) - 1) / 2);
}
constexpr Tag begin_tag(EntityType e) { return static_cast<Tag>(1 + 2 * index_of(e)); }
constexpr Tag inside_tag(EntityType e) { return static_cast<Tag>(2 + 2 * index_of(e)); }

/// BIO2 transition legality. `prev == nullopt` means sequence start.
/// I-X is legal only after B-X or I-X.
bool transition_allowed(std::optional<Tag> prev, Tag next);

/// True when every adjacent pair (including the start) is legal.
bool is_well_formed(std::span<const Tag> tags);

/// Rewrites every illegal I-X as B-X, which yields the same spans as the
/// lenient reading.
std::vector<Tag> repair_bio2(std::span<const Tag> tags);

}  // namespace trimod
