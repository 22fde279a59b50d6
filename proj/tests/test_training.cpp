#include <doctest.h>

#include <cmath>
#include <set>

#include "trimod/optimizer.hpp"
#include "trimod/training.hpp"

using namespace trimod;

namespace {

ModelDims small_dims() {
  ModelDims d;
  d.word_dim = 6;
  d.char_embed_dim = 4;
  d.char_hidden = 3;
  d.word_hidden = 5;
  d.fused_dim = 6;
  d.visual_dim = 4;
  d.segmenter = {4, 5, 3};
  return d;
}

std::vector<Post> toy_posts() {
  Post a;
  a.tokens = {"Maple", "Leafs", "win", "#TonightGame"};
  a.tags = {Tag::B_ORG, Tag::I_ORG, Tag::O, Tag::O};
  Post b;
  b.tokens = {"Rex", "the", "German", "Shepherd"};
  b.tags = {Tag::B_PER, Tag::O, Tag::B_MISC, Tag::I_MISC};
  Post c;
  c.tokens = {"rain", "in", "Paris"};
  c.tags = {Tag::O, Tag::O, Tag::B_LOC};
  Post d;
  d.tokens = {"Alice", "joins", "NASA"};
  d.tags = {Tag::B_PER, Tag::O, Tag::B_ORG};
  return {a, b, c, d};
}

double max_param_diff(const ParameterStore& a, const ParameterStore& b) {
  double worst = 0.0;
  for (const auto& [name, p] : a) {
    const auto& q = b.at(name);
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      worst = std::max(worst, std::abs(p.value[i] - q.value[i]));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("sgd arithmetic") {
  ParameterStore store;
  auto& t = store.add("t", Tensor::scalar(1.0));
  auto params = store.all();
  t.grad[0] = 1.0;
  sgd_step(params, {0.1, 0.0, 0.0, 5.0});
  CHECK(t.value[0] == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(t.grad[0] == 0.0);

  t.value[0] = 1.0;
  t.grad[0] = 1.0;
  sgd_step(params, {0.1, 0.0, 0.1, 5.0});
  CHECK(t.value[0] == doctest::Approx(0.89).epsilon(1e-15));

  t.value[0] = 1.0;
  t.grad[0] = 0.0;
  sgd_step(params, {0.1, 0.5, 0.0, 5.0});
  CHECK(t.value[0] == doctest::Approx(0.95).epsilon(1e-15));
}

TEST_CASE("gradient clipping rescales to the clip norm") {
  ParameterStore store;
  auto& a = store.add("a", Tensor::vector({0, 0}));
  auto params = store.all();
  a.grad = Tensor::vector({30, 40});
  CHECK(gradient_norm(params) == 50.0);
  sgd_step(params, {1.0, 0.0, 0.0, 5.0});
  CHECK(a.value[0] == doctest::Approx(-3.0).epsilon(1e-15));
  CHECK(a.value[1] == doctest::Approx(-4.0).epsilon(1e-15));
}

TEST_CASE("quadratic bowl converges") {
  ParameterStore store;
  auto& t = store.add("t", Tensor::scalar(3.0));
  auto params = store.all();
  for (int i = 0; i < 100; ++i) {
    Graph g;
    g.backward(sum(mul(g.param(t), g.param(t))));
    sgd_step(params, {0.1, 0.0, 0.0, 5.0});
  }
  CHECK(std::abs(t.value[0]) < 1e-8);
}

TEST_CASE("learning rate schedule") {
  TrainConfig c;
  CHECK(lr_schedule(0, c) == 0.005);
  CHECK(lr_schedule(1, c) == doctest::Approx(0.005 / 1.05).epsilon(1e-15));
  for (std::size_t e = 1; e < 300; ++e) CHECK(lr_schedule(e, c) < lr_schedule(e - 1, c));
}

TEST_CASE("config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.dropout = 1.0;
  CHECK_THROWS(c.validate());
  c = TrainConfig{};
  c.batch_size = 0;
  CHECK_THROWS(c.validate());
}

TEST_CASE("one small step on one example decreases its loss") {
  const auto posts = toy_posts();
  TrainConfig config;
  config.dropout = 0.0;
  TriModModel model(TriModModel::initialize(small_dims(), config, posts));
  const auto prepared = model.prepare(posts);
  const PreparedPost* one[] = {&prepared[1]};
  auto loss_of = [&] {
    Graph g;
    return model.loss(g, prepared[1]).item();
  };
  const double before = loss_of();
  train_group(model, one, 1e-4, config, {});
  CHECK(loss_of() < before);
}

TEST_CASE("accumulating k batches equals one batch of size k*b") {
  const auto posts = toy_posts();
  TrainConfig base;
  base.dropout = 0.0;
  base.epochs = 2;
  base.learning_rate = 0.1;
  const auto initial = TriModModel::initialize(small_dims(), base, posts);

  TrainConfig accumulated = base;
  accumulated.batch_size = 2;
  accumulated.accumulation_steps = 2;
  TrainConfig single = base;
  single.batch_size = 4;
  single.accumulation_steps = 1;

  TriModModel a(initial);
  TriModModel b(initial);
  const auto pa = a.prepare(posts);
  const auto pb = b.prepare(posts);
  train(a, pa, {}, accumulated);
  train(b, pb, {}, single);
  CHECK(max_param_diff(a.bundle().params, b.bundle().params) < 1e-9);
  CHECK(max_param_diff(a.bundle().params, initial.params) > 1e-6);
}

TEST_CASE("a trailing partial group is still applied") {
  const auto posts = toy_posts();
  TrainConfig config;
  config.dropout = 0.0;
  config.epochs = 1;
  config.batch_size = 3;
  config.accumulation_steps = 9;
  const auto initial = TriModModel::initialize(small_dims(), config, posts);
  TriModModel model(initial);
  const auto prepared = model.prepare(posts);
  train(model, prepared, {}, config);
  CHECK(max_param_diff(model.bundle().params, initial.params) > 0.0);
}

TEST_CASE("dropout touches word and character embeddings only") {
  const auto posts = toy_posts();
  TrainConfig config;
  config.epochs = 1;
  TriModModel model(TriModModel::initialize(small_dims(), config, posts));
  const auto prepared = model.prepare(posts);
  std::set<std::string> sites;
  std::size_t calls = 0;
  TrainHooks hooks;
  hooks.on_dropout = [&](std::string_view site) {
    sites.emplace(site);
    ++calls;
  };
  train(model, prepared, {}, config, hooks);
  CHECK(sites == std::set<std::string>{"char_embedding", "word_embedding"});
  std::size_t expected = 0;
  for (const auto& p : posts) {
    for (const auto& t : p.tokens) expected += 1 + t.size();
  }
  CHECK(calls == expected);

  calls = 0;
  evaluate(model, prepared);
  CHECK(calls == 0);
}

TEST_CASE("loss after one epoch is below the initial loss") {
  const auto posts = toy_posts();
  TrainConfig config;
  config.epochs = 1;
  config.learning_rate = 0.05;
  config.accumulation_steps = 1;
  config.batch_size = 1;
  TriModModel model(TriModModel::initialize(small_dims(), config, posts));
  const auto prepared = model.prepare(posts);
  const double before = corpus_loss(model, prepared);
  train(model, prepared, {}, config);
  CHECK(corpus_loss(model, prepared) < before);
}

TEST_CASE("fixed transitions stay fixed under regularized training") {
  const auto posts = toy_posts();
  TrainConfig config;
  config.epochs = 2;
  config.l1 = 0.01;
  config.l2 = 0.01;
  config.accumulation_steps = 1;
  config.batch_size = 1;
  const auto initial = TriModModel::initialize(small_dims(), config, posts);
  TriModModel model(initial);
  const auto prepared = model.prepare(posts);
  train(model, prepared, {}, config);
  const auto& before = initial.params.at(TriModModel::kTransitions).value;
  const auto& after = model.transitions().value;
  std::size_t fixed = 0, moved = 0;
  for (std::size_t i = 0; i < before.size(); ++i) {
    if (before[i] == kForbiddenTransition) {
      CHECK(after[i] == kForbiddenTransition);
      ++fixed;
    } else {
      moved += after[i] != before[i];
    }
  }
  CHECK(fixed > 0);
  CHECK(moved > 0);
}

TEST_CASE("two-sentence toy corpus is memorized in 200 epochs") {
  const auto all = toy_posts();
  const std::vector<Post> posts(all.begin(), all.begin() + 2);
  TrainConfig config;
  config.epochs = 200;
  config.dropout = 0.0;
  config.learning_rate = 0.1;
  config.lr_decay = 0.0;
  config.batch_size = 1;
  config.accumulation_steps = 1;
  TriModModel model(TriModModel::initialize(small_dims(), config, posts));
  const auto prepared = model.prepare(posts);
  train(model, prepared, {}, config);
  CHECK(evaluate(model, prepared).overall.f1() == 1.0);
}

TEST_CASE("identical seeds give identical reports and parameters") {
  const auto posts = toy_posts();
  TrainConfig config;
  config.epochs = 3;
  config.batch_size = 2;
  config.accumulation_steps = 1;
  auto run = [&] {
    TriModModel model(TriModModel::initialize(small_dims(), config, posts));
    const auto prepared = model.prepare(posts);
    auto report = train(model, prepared, prepared, config);
    return std::make_pair(report, model.bundle().params);
  };
  const auto [r1, p1] = run();
  const auto [r2, p2] = run();
  CHECK(r1 == r2);
  CHECK(max_param_diff(p1, p2) == 0.0);
}
