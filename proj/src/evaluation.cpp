#include "trimod/evaluation.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <string>

#include "trimod/corpus.hpp"
#include "trimod/tensor.hpp"

namespace trimod {

std::vector<EntitySpan> extract_spans(std::span<const Tag> tags, SpanMode mode) {
  std::vector<EntitySpan> spans;
  bool open = false;
  EntitySpan current{EntityType::PER, 0, 0};
  auto close = [&](std::size_t end) {
    if (open) {
      current.end = end;
      spans.push_back(current);
      open = false;
    }
  };
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const Tag t = tags[i];
    const auto type = entity_of(t);
    if (!type) {
      close(i);
    } else if (is_begin(t)) {
      close(i);
      current = {*type, i, i};
      open = true;
    } else if (open && current.type == *type) {
      // continuation
    } else {
      close(i);
      if (mode == SpanMode::Lenient) {
        current = {*type, i, i};
        open = true;
      }
    }
  }
  close(tags.size());
  return spans;
}

double MatchCounts::precision() const {
  return predicted == 0 ? 0.0 : static_cast<double>(correct) / predicted;
}

double MatchCounts::recall() const {
  return gold == 0 ? 0.0 : static_cast<double>(correct) / gold;
}

double MatchCounts::f1() const {
  // 2PR/(P+R) in count form
  if (correct == 0) return 0.0;
  return 2.0 * static_cast<double>(correct) / static_cast<double>(gold + predicted);
}

MatchCounts& MatchCounts::operator+=(const MatchCounts& other) {
  gold += other.gold;
  predicted += other.predicted;
  correct += other.correct;
  return *this;
}

EvalReport prf1(std::span<const Tag> gold, std::span<const Tag> predicted,
                SpanMode mode) {
  if (gold.size() != predicted.size()) {
    throw ContractError("prf1: gold has " + std::to_string(gold.size()) +
                        " tags but prediction has " + std::to_string(predicted.size()));
  }
  const auto g = extract_spans(gold, mode);
  const auto p = extract_spans(predicted, mode);
  EvalReport report;
  for (const auto& s : g) {
    ++report.overall.gold;
    ++report.per_type[index_of(s.type)].gold;
  }
  for (const auto& s : p) {
    ++report.overall.predicted;
    ++report.per_type[index_of(s.type)].predicted;
    // Spans from one sequence never repeat, so membership is enough.
    if (std::find(g.begin(), g.end(), s) != g.end()) {
      ++report.overall.correct;
      ++report.per_type[index_of(s.type)].correct;
    }
  }
  return report;
}

EvalReport prf1(std::span<const Post> gold, std::span<const std::vector<Tag>> predicted,
                SpanMode mode) {
  if (gold.size() != predicted.size()) {
    throw ContractError("prf1: " + std::to_string(gold.size()) + " gold posts but " +
                        std::to_string(predicted.size()) + " predictions");
  }
  EvalReport total;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (!gold[i].has_tags()) {
      throw ContractError("prf1: gold post " + std::to_string(i) + " has no tags");
    }
    const auto r = prf1(gold[i].tags, predicted[i], mode);
    total.overall += r.overall;
    for (std::size_t t = 0; t < kNumEntityTypes; ++t) total.per_type[t] += r.per_type[t];
  }
  return total;
}

void print_report(std::ostream& out, const EvalReport& report, bool per_category) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::left << std::setw(14) << "scope" << std::right << std::setw(12)
      << "precision" << std::setw(10) << "recall" << std::setw(10) << "f1"
      << std::setw(8) << "gold" << std::setw(8) << "pred" << std::setw(9) << "correct"
      << "\n";
  auto row = [&](std::string_view name, const MatchCounts& c) {
    out << std::left << std::setw(14) << name << std::right << std::fixed
        << std::setprecision(2) << std::setw(12) << 100.0 * c.precision()
        << std::setw(10) << 100.0 * c.recall() << std::setw(10) << 100.0 * c.f1()
        << std::setw(8) << c.gold << std::setw(8) << c.predicted << std::setw(9)
        << c.correct << "\n";
  };
  row("overall", report.overall);
  if (per_category) {
    for (auto t : kEntityTypes) row(entity_long_name(t), report.of(t));
  }
  out.flags(flags);
  out.precision(precision);
}

void write_report_csv(std::ostream& out, const EvalReport& report) {
  const auto precision = out.precision();
  out << std::setprecision(10);
  out << "scope,precision,recall,f1,gold,predicted,correct\n";
  auto row = [&](std::string_view name, const MatchCounts& c) {
    out << name << ',' << c.precision() << ',' << c.recall() << ',' << c.f1() << ','
        << c.gold << ',' << c.predicted << ',' << c.correct << '\n';
  };
  row("overall", report.overall);
  for (auto t : kEntityTypes) row(entity_code(t), report.of(t));
  out.precision(precision);
}

}  // namespace trimod
