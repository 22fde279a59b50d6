#pragma once

// Brute-force linear-chain CRF over every label sequence.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "trimod/tensor.hpp"

namespace oracle {

inline double path_score(const trimod::Tensor& P, const trimod::Tensor& T,
                         const std::vector<std::size_t>& y) {
  const std::size_t L = P.dim(1);
  double s = T.at(L, y[0]);
  for (std::size_t i = 0; i < y.size(); ++i) {
    s += P.at(i, y[i]);
    if (i > 0) s += T.at(y[i - 1], y[i]);
  }
  return s + T.at(y.back(), L + 1);
}

// Calls f(sequence) for all L^n sequences in lexicographic order.
template <class F>
void for_each_sequence(std::size_t n, std::size_t L, F&& f) {
  std::vector<std::size_t> y(n, 0);
  while (true) {
    f(static_cast<const std::vector<std::size_t>&>(y));
    std::size_t i = n;
    while (i > 0) {
      if (++y[i - 1] < L) break;
      y[i - 1] = 0;
      --i;
    }
    if (i == 0) return;
  }
}

inline double log_partition(const trimod::Tensor& P, const trimod::Tensor& T) {
  std::vector<double> scores;
  for_each_sequence(P.dim(0), P.dim(1),
                    [&](const auto& y) { scores.push_back(path_score(P, T, y)); });
  const double mx = *std::max_element(scores.begin(), scores.end());
  double total = 0.0;
  for (double s : scores) total += std::exp(s - mx);
  return mx + std::log(total);
}

// Highest score; ties go to the sequence whose last differing label is lower.
struct Best {
  std::vector<std::size_t> labels;
  double score = -std::numeric_limits<double>::infinity();
};

inline bool tie_preferred(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  return std::lexicographical_compare(a.rbegin(), a.rend(), b.rbegin(), b.rend());
}

inline Best argmax(const trimod::Tensor& P, const trimod::Tensor& T) {
  Best best;
  for_each_sequence(P.dim(0), P.dim(1), [&](const auto& y) {
    const double s = path_score(P, T, y);
    if (s > best.score || (s == best.score && tie_preferred(y, best.labels))) {
      best.score = s;
      best.labels = y;
    }
  });
  return best;
}

}  // namespace oracle
