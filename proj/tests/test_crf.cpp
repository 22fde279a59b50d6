#include <doctest.h>

#include <cmath>
#include <random>

#include "crf_oracle.hpp"
#include "trimod/crf.hpp"
#include "trimod/gradcheck.hpp"
#include "trimod/labels.hpp"

using namespace trimod;

namespace {

Tensor uniform(Shape shape, std::mt19937_64& rng, double bound) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = dist(rng);
  return t;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("single token path score") {
  const auto P = Tensor::matrix(1, 2, {2, -1});
  const Tensor T({4, 4});
  const std::vector<std::size_t> y = {0};
  CHECK(crf::path_score(P, T, y) == 2.0);
}

TEST_CASE("two tokens, two labels: hand sum") {
  const auto P = Tensor::matrix(2, 2, {1.0, 0.5, -0.25, 2.0});
  Tensor T({4, 4});
  T.at(2, 1) = 0.3;   // START -> 1
  T.at(1, 0) = -0.7;  // 1 -> 0
  T.at(0, 3) = 0.2;   // 0 -> END
  const std::vector<std::size_t> y = {1, 0};
  CHECK(crf::path_score(P, T, y) == doctest::Approx(0.3 + 0.5 + -0.7 + -0.25 + 0.2));
}

TEST_CASE("adding a constant to every emission shifts path scores by n*c") {
  std::mt19937_64 rng(1);
  auto P = uniform({3, 4}, rng, 1.0);
  const auto T = uniform({6, 6}, rng, 1.0);
  const std::vector<std::size_t> y = {3, 0, 2};
  const double before = crf::path_score(P, T, y);
  for (auto& v : P.values()) v += 0.75;
  CHECK(crf::path_score(P, T, y) == doctest::Approx(before + 3 * 0.75).epsilon(1e-14));
}

TEST_CASE("uniform scores") {
  for (std::size_t n = 1; n <= 4; ++n) {
    const Tensor P({n, 9});
    const Tensor T({11, 11});
    CHECK(crf::log_partition(P, T) == doctest::Approx(n * std::log(9.0)).epsilon(1e-14));
    const std::vector<std::size_t> gold(n, 3);
    CHECK(crf::nll(P, T, gold) == doctest::Approx(n * std::log(9.0)).epsilon(1e-14));
    CHECK(crf::sequence_prob(P, T, gold) == doctest::Approx(std::pow(9.0, -double(n))));
  }
}

TEST_CASE("log partition matches enumeration and dominates every path") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + trial % 4;
    const auto P = uniform({n, 9}, rng, 3.0);
    const auto T = uniform({11, 11}, rng, 3.0);
    const double z = crf::log_partition(P, T);
    CHECK(rel(z, oracle::log_partition(P, T)) < 1e-10);
    oracle::for_each_sequence(n, 9, [&](const auto& y) {
      if (y[0] == 0) REQUIRE(z >= crf::path_score(P, T, y));
    });
  }
}

TEST_CASE("sequence probabilities sum to one") {
  std::mt19937_64 rng(3);
  for (std::size_t n = 1; n <= 3; ++n) {
    for (std::size_t L = 1; L <= 4; ++L) {
      const auto P = uniform({n, L}, rng, 2.0);
      const auto T = uniform({L + 2, L + 2}, rng, 2.0);
      double total = 0.0;
      oracle::for_each_sequence(n, L, [&](const auto& y) { total += crf::sequence_prob(P, T, y); });
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("viterbi matches the enumeration argmax") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + trial % 4;
    const auto P = uniform({n, 9}, rng, 3.0);
    const auto T = uniform({11, 11}, rng, 3.0);
    const auto best = oracle::argmax(P, T);
    const auto decoded = crf::viterbi_decode(P, T);
    CHECK(decoded.labels == best.labels);
    CHECK(rel(decoded.score, best.score) < 1e-10);
    const double p = crf::sequence_prob(P, T, decoded.labels);
    oracle::for_each_sequence(n, 9, [&](const auto& y) {
      if (y[0] < 2) REQUIRE(crf::sequence_prob(P, T, y) <= p);
    });
  }
}

TEST_CASE("viterbi ties go to the lower label index") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> small(-1, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 3;
    const std::size_t L = 2 + trial % 3;
    Tensor P({n, L}), T({L + 2, L + 2});
    for (auto& v : P.values()) v = small(rng);
    for (auto& v : T.values()) v = small(rng);
    CHECK(crf::viterbi_decode(P, T).labels == oracle::argmax(P, T).labels);
  }
  const Tensor zero_p({3, 4});
  const Tensor zero_t({6, 6});
  CHECK(crf::viterbi_decode(zero_p, zero_t).labels == std::vector<std::size_t>{0, 0, 0});
}

TEST_CASE("single token decodes to argmax of emission plus boundaries") {
  const auto P = Tensor::matrix(1, 3, {1.0, 1.5, 0.2});
  Tensor T({5, 5});
  T.at(3, 0) = 0.4;
  T.at(0, 4) = 0.2;
  const auto d = crf::viterbi_decode(P, T);
  CHECK(d.labels == std::vector<std::size_t>{0});
  CHECK(d.score == doctest::Approx(1.6));
}

TEST_CASE("shift invariance of sequence probabilities") {
  std::mt19937_64 rng(6);
  auto P = uniform({3, 5}, rng, 1.0);
  auto T = uniform({7, 7}, rng, 1.0);
  const std::vector<std::size_t> y = {1, 4, 2};
  const double p = crf::sequence_prob(P, T, y);
  for (std::size_t i = 0; i < 3; ++i) P.at(i, 2) += 1.3;
  CHECK(crf::sequence_prob(P, T, y) != doctest::Approx(p));
  for (std::size_t i = 0; i < 3; ++i) P.at(i, 2) -= 1.3;
  for (std::size_t y2 = 0; y2 < 5; ++y2) P.at(1, y2) += 2.5;
  CHECK(crf::sequence_prob(P, T, y) == doctest::Approx(p).epsilon(1e-12));
  for (std::size_t x = 0; x < 7; ++x) T.at(x, 6) += 0.9;
  CHECK(crf::sequence_prob(P, T, y) == doctest::Approx(p).epsilon(1e-12));
}

TEST_CASE("nll is positive for finite scores") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    auto P = uniform({3, 9}, rng, 5.0);
    const auto T = uniform({11, 11}, rng, 5.0);
    const std::vector<std::size_t> gold = {1, 2, 0};
    P.at(0, 1) += 20;
    P.at(1, 2) += 20;
    P.at(2, 0) += 20;
    CHECK(crf::nll(P, T, gold) > 0.0);
  }
}

TEST_CASE("marginals equal enumerated posteriors") {
  std::mt19937_64 rng(8);
  const std::size_t n = 3, L = 4;
  const auto P = uniform({n, L}, rng, 2.0);
  const auto T = uniform({L + 2, L + 2}, rng, 2.0);
  const auto m = crf::marginals(P, T);
  Tensor unary({n, L});
  Tensor pairs({L + 2, L + 2});
  oracle::for_each_sequence(n, L, [&](const auto& y) {
    const double p = crf::sequence_prob(P, T, y);
    for (std::size_t i = 0; i < n; ++i) {
      unary.at(i, y[i]) += p;
      if (i > 0) pairs.at(y[i - 1], y[i]) += p;
    }
    pairs.at(L, y[0]) += p;
    pairs.at(y[n - 1], L + 1) += p;
  });
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t y = 0; y < L; ++y) {
      CHECK(m.unary.at(i, y) == doctest::Approx(unary.at(i, y)).epsilon(1e-12));
      CHECK(m.unary.at(i, y) >= 0.0);
      CHECK(m.unary.at(i, y) <= 1.0);
      row += m.unary.at(i, y);
    }
    CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    CHECK(m.transitions[i] == doctest::Approx(pairs[i]).epsilon(1e-12));
  }
}

TEST_CASE("nll gradient passes finite differences") {
  std::mt19937_64 rng(9);
  ParameterStore store;
  auto& P = store.add("P", uniform({4, 9}, rng, 2.0));
  auto& T = store.add("T", uniform({11, 11}, rng, 1.0));
  const std::vector<std::size_t> gold = {1, 2, 0, 7};
  auto params = store.all();
  const auto r = grad_check([&](Graph& g) { return crf_nll(g.param(P), g.param(T), gold); }, params);
  CHECK(r.max_relative_error < 1e-4);

  Graph g;
  auto loss = crf_nll(g.param(P), g.param(T), gold);
  CHECK(loss.item() == doctest::Approx(crf::nll(P.value, T.value, gold)).epsilon(1e-14));
}

TEST_CASE("fixed transitions and BIO2 decoding") {
  const auto mask = crf::fixed_transition_mask(9, true);
  const std::size_t S = 9, E = 10;
  for (std::size_t x = 0; x < 11; ++x) {
    CHECK(mask[x * 11 + S]);
    CHECK(mask[E * 11 + x]);
  }
  CHECK(mask[index_of(Tag::O) * 11 + index_of(Tag::I_PER)]);
  CHECK(mask[S * 11 + index_of(Tag::I_LOC)]);
  CHECK(mask[index_of(Tag::B_PER) * 11 + index_of(Tag::I_LOC)]);
  CHECK_FALSE(mask[index_of(Tag::B_PER) * 11 + index_of(Tag::I_PER)]);
  CHECK_FALSE(mask[index_of(Tag::I_PER) * 11 + index_of(Tag::I_PER)]);
  CHECK_FALSE(mask[S * 11 + index_of(Tag::B_ORG)]);
  CHECK_FALSE(mask[index_of(Tag::I_MISC) * 11 + E]);
  const auto plain = crf::fixed_transition_mask(9, false);
  CHECK_FALSE(plain[index_of(Tag::O) * 11 + index_of(Tag::I_PER)]);
  CHECK(plain[E * 11 + 0]);

  std::mt19937_64 rng(10);
  const auto T0 = crf::initial_transitions(9, true, rng);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) CHECK(T0[i] == kForbiddenTransition);
  }
  for (int trial = 0; trial < 1000; ++trial) {
    auto T = uniform({11, 11}, rng, 3.0);
    crf::apply_fixed_transitions(T, mask);
    const auto P = uniform({static_cast<std::size_t>(1 + trial % 8), 9}, rng, 10.0);
    std::vector<Tag> tags;
    for (auto y : crf::viterbi_decode(P, T).labels) tags.push_back(tag_from_index(y));
    REQUIRE(is_well_formed(tags));
  }
}

TEST_CASE("emission head shapes and zero weights") {
  std::mt19937_64 rng(11);
  ParameterStore store;
  auto head = EmissionHead::declare(store, "e", 300, 9, rng);
  Graph g;
  std::vector<Var> toks;
  for (int i = 0; i < 4; ++i) toks.push_back(g.constant(uniform({300}, rng, 1.0)));
  CHECK(head.emissions(g, toks).value().shape() == Shape{4, 9});
  for (auto* p : head.parameters()) p->value.fill(0.0);
  CHECK(head.emissions(g, toks).value() == Tensor({4, 9}));
}

TEST_CASE("shape errors") {
  CHECK_THROWS_AS(crf::log_partition(Tensor({2, 9}), Tensor({9, 9})), DimensionError);
  const std::vector<std::size_t> short_gold = {0};
  CHECK_THROWS_AS(crf::nll(Tensor({2, 9}), Tensor({11, 11}), short_gold), DimensionError);
  const std::vector<std::size_t> bad = {0, 9};
  CHECK_THROWS_AS(crf::path_score(Tensor({2, 9}), Tensor({11, 11}), bad), DimensionError);
}
