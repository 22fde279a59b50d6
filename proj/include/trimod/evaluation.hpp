#pragma once

#include <array>
#include <compare>
#include <iosfwd>
#include <span>
#include <vector>

#include "trimod/labels.hpp"

namespace trimod {

struct Post;

/// Entity occupying tokens [start, end).
struct EntitySpan {
  EntityType type;
  std::size_t start;
  std::size_t end;

  friend auto operator<=>(const EntitySpan&, const EntitySpan&) = default;
};

enum class SpanMode {
  /// An orphan I-X opens a new span (conlleval behaviour).
  Lenient,
  /// An orphan I-X is dropped.
  Strict,
};

/// Spans in left-to-right order.
std::vector<EntitySpan> extract_spans(std::span<const Tag> tags,
                                      SpanMode mode = SpanMode::Lenient);

struct MatchCounts {
  std::size_t gold = 0;
  std::size_t predicted = 0;
  std::size_t correct = 0;

  double precision() const;
  double recall() const;
  /// 2PR/(P+R), or 0 when P+R == 0.
  double f1() const;

  MatchCounts& operator+=(const MatchCounts& other);
};

struct EvalReport {
  MatchCounts overall;
  std::array<MatchCounts, kNumEntityTypes> per_type;

  const MatchCounts& of(EntityType t) const { return per_type[index_of(t)]; }
};

/// Exact-match micro P/R/F1 of predicted tag sequences against gold posts.
/// Throws ContractError when the corpora are not aligned.
EvalReport prf1(std::span<const Post> gold, std::span<const std::vector<Tag>> predicted,
                SpanMode mode = SpanMode::Lenient);

/// Counts for a single aligned pair of tag sequences.
EvalReport prf1(std::span<const Tag> gold, std::span<const Tag> predicted,
                SpanMode mode = SpanMode::Lenient);

/// Aligned table: overall row plus one row per category, percentages.
void print_report(std::ostream& out, const EvalReport& report, bool per_category);
/// `scope,precision,recall,f1,gold,predicted,correct` rows.
void write_report_csv(std::ostream& out, const EvalReport& report);

}  // namespace trimod
