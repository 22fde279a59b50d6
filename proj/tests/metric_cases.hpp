#pragma once

// Hand-counted gold/prediction pairs for the span metric.

#include <string>
#include <vector>

#include "trimod/evaluation.hpp"
#include "trimod/text.hpp"

namespace metric_cases {

struct Case {
  const char* gold;
  const char* predicted;
  trimod::SpanMode mode;
  std::size_t gold_spans, predicted_spans, correct;
  double precision, recall, f1;
};

inline const std::vector<Case>& cases() {
  using M = trimod::SpanMode;
  static const std::vector<Case> list = {
      {"B-PER I-PER O", "B-PER I-PER O", M::Lenient, 1, 1, 1, 1.0, 1.0, 1.0},
      {"B-PER I-PER O", "B-PER O O", M::Lenient, 1, 1, 0, 0.0, 0.0, 0.0},
      {"B-PER O B-LOC O B-ORG O O", "B-PER O B-LOC I-LOC B-ORG O B-MISC", M::Lenient, 3, 4, 2,
       0.5, 2.0 / 3.0, 4.0 / 7.0},
      {"O O O", "O O O", M::Lenient, 0, 0, 0, 0.0, 0.0, 0.0},
      {"O O", "B-PER O", M::Lenient, 0, 1, 0, 0.0, 0.0, 0.0},
      {"B-LOC", "O", M::Lenient, 1, 0, 0, 0.0, 0.0, 0.0},
      {"B-PER", "B-LOC", M::Lenient, 1, 1, 0, 0.0, 0.0, 0.0},
      {"O I-LOC", "O B-LOC", M::Lenient, 1, 1, 1, 1.0, 1.0, 1.0},
      {"B-LOC I-LOC", "O I-LOC", M::Strict, 1, 0, 0, 0.0, 0.0, 0.0},
      {"B-ORG B-ORG", "B-ORG B-ORG", M::Lenient, 2, 2, 2, 1.0, 1.0, 1.0},
      {"B-ORG I-ORG", "B-ORG B-ORG", M::Lenient, 1, 2, 0, 0.0, 0.0, 0.0},
      {"B-PER I-PER I-PER O B-LOC", "B-PER I-PER I-PER O O", M::Lenient, 2, 1, 1, 1.0, 0.5,
       2.0 / 3.0},
      {"B-MISC I-MISC O B-MISC", "B-MISC I-MISC O B-PER", M::Lenient, 2, 2, 1, 0.5, 0.5, 0.5},
      {"B-PER I-LOC", "B-PER B-LOC", M::Lenient, 2, 2, 2, 1.0, 1.0, 1.0},
      {"B-PER B-LOC", "B-PER I-LOC", M::Strict, 2, 1, 1, 1.0, 0.5, 2.0 / 3.0},
      {"O O B-ORG I-ORG", "O O B-ORG I-ORG", M::Lenient, 1, 1, 1, 1.0, 1.0, 1.0},
      {"B-LOC O", "B-LOC I-LOC", M::Lenient, 1, 1, 0, 0.0, 0.0, 0.0},
      {"B-PER O I-PER", "B-PER O B-PER", M::Lenient, 2, 2, 2, 1.0, 1.0, 1.0},
      {"B-PER O B-PER O B-PER O B-PER", "B-PER O O O B-PER O O", M::Lenient, 4, 2, 2, 1.0, 0.5,
       2.0 / 3.0},
      {"B-LOC I-LOC I-LOC", "B-LOC I-LOC B-LOC", M::Lenient, 1, 2, 0, 0.0, 0.0, 0.0},
  };
  return list;
}

inline std::vector<trimod::Tag> tags(const char* text) {
  std::vector<trimod::Tag> out;
  for (auto t : trimod::split_whitespace(text)) out.push_back(*trimod::parse_tag(t));
  return out;
}

}  // namespace metric_cases
