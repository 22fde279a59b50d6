#include "trimod/gradcheck_suite.hpp"

#include <random>

#include "trimod/model.hpp"
#include "trimod/segmenter.hpp"

namespace trimod {
namespace {

Tensor uniform(Shape shape, std::mt19937_64& rng, double bound = 1.0) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = dist(rng);
  return t;
}

// Random linear read-out of a list of vectors, so every output coordinate
// carries a distinct weight.
Var readout(Graph& g, std::span<const Var> outputs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Var> terms;
  for (const auto& v : outputs) terms.push_back(dot(g.constant(uniform(v.shape(), rng)), v));
  return sum(concat(std::span<const Var>(terms)));
}

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

// Moves every parameter to a random point in [-1, 1] so the check is not
// dominated by the small-gradient regime of a fresh initialization.
void randomize(std::span<Parameter* const> params, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto* p : params) {
    for (auto& v : p->value.values()) v = dist(rng);
  }
}

GradCheckOptions probe_options(const GradCheckSuiteOptions& o) {
  return {o.eps, o.full_size ? std::size_t{6} : std::size_t{0}, o.seed};
}

std::vector<Post> toy_posts() {
  Post a;
  a.tokens = {"Maple", "Leafs", "win", "#TonightGame"};
  a.tags = {Tag::B_ORG, Tag::I_ORG, Tag::O, Tag::O};
  a.image_id = "img1";
  a.hashtags = {"TonightGame"};
  Post b;
  b.tokens = {"Rex", "the", "German", "Shepherd"};
  b.tags = {Tag::B_PER, Tag::O, Tag::B_MISC, Tag::I_MISC};
  b.image_id = "img2";
  return {a, b};
}

GradCheckResult check_numeric(const GradCheckSuiteOptions& o) {
  std::mt19937_64 rng(o.seed);
  ParameterStore store;
  auto& a = store.add("a", uniform({3, 4}, rng));
  auto& b = store.add("b", uniform({4, 2}, rng));
  auto& v = store.add("v", uniform({4}, rng));
  auto& w = store.add("w", uniform({3}, rng));
  auto f = [&](Graph& g) {
    auto A = g.param(a), B = g.param(b), V = g.param(v), W = g.param(w);
    auto m = tanh(matmul(A, B));
    auto col = matvec(A, V);
    auto gate = sigmoid(add(col, W));
    auto mixed = mul(gate, one_minus(tanh(W)));
    auto probs = softmax(concat({mixed, slice(V, 1, 2)}));
    auto pooled = weighted_sum(softmax(W), {row(m, 0), row(m, 1), row(m, 2)});
    auto stacked = stack(std::vector<Var>{exp(scale(col, 0.3)), sub(W, mixed)});
    Var outs[] = {pooled, row(stacked, 1), pick(probs, 2)};
    auto r = readout(g, outs, o.seed + 1);
    return add(add(r, log(add(sum(probs), sigmoid(pick(average({slice(V, 0, 3), W}), 0))))),
               softmax_cross_entropy(concat({col, W}), 4));
  };
  auto params = store.all();
  return grad_check(f, params, probe_options(o));
}

GradCheckResult check_embeddings(const GradCheckSuiteOptions& o) {
  std::mt19937_64 rng(o.seed);
  ParameterStore store;
  const std::vector<std::string> words = {"dog", "Park", "run", "éclair"};
  auto wt = WordTable::create(store, "word", nullptr, words, 5, rng);
  auto ct = CharTable::create(store, "char", words, 3, rng);
  auto f = [&](Graph& g) {
    std::vector<Var> outs;
    for (const auto& t : {"dog", "park", "unseen", "éclair"}) {
      outs.push_back(wt.embed(g, t));
      auto chars = ct.embed(g, t);
      outs.push_back(average(std::span<const Var>(chars)));
    }
    return readout(g, outs, o.seed + 1);
  };
  auto params = store.all();
  return grad_check(f, params, probe_options(o));
}

GradCheckResult check_encoders(const GradCheckSuiteOptions& o) {
  std::mt19937_64 rng(o.seed);
  const auto d = o.full_size ? ModelDims{} : small_dims();
  ParameterStore store;
  const std::vector<std::string> tokens = {"Rex", "runs", "in", "Hyde", "Park"};
  auto wt = WordTable::create(store, "word", nullptr, tokens, d.word_dim, rng);
  auto ct = CharTable::create(store, "char", tokens, d.char_embed_dim, rng);
  auto cg = BiGru::declare(store, "char_gru", d.char_embed_dim, d.char_hidden, rng);
  auto wg = BiGru::declare(store, "word_gru", d.token_dim(), d.word_hidden, rng);
  TextEncoder enc(wt, ct, cg, wg);
  auto f = [&](Graph& g) {
    auto h = enc.encode(g, tokens);
    return readout(g, h, o.seed + 1);
  };
  auto params = store.all();
  randomize(params, o.seed + 3);
  return grad_check(f, params, probe_options(o));
}

GradCheckResult check_segmenter(const GradCheckSuiteOptions& o) {
  std::mt19937_64 rng(o.seed);
  const auto dims = o.full_size ? SegmenterDims{} : small_dims().segmenter;
  ParameterStore store;
  const std::vector<std::string> words = {"playing", "with", "dog"};
  auto model = Segmenter::declare(store, "seg", segmenter_alphabet(words), dims, rng);
  const auto examples = make_synthetic_pairs(words, 2, o.seed);
  auto f = [&](Graph& g) {
    auto l = model.loss(g, examples[0]);
    return add(l, model.loss(g, examples[1]));
  };
  auto params = store.all();
  randomize(params, o.seed + 3);
  return grad_check(f, params, probe_options(o));
}

GradCheckResult check_fusion(const GradCheckSuiteOptions& o) {
  std::mt19937_64 rng(o.seed);
  const std::size_t d = o.full_size ? 300 : 6;
  const std::array<std::size_t, kNumModalities> in = {o.full_size ? 300u : 5u, 4u,
                                                      o.full_size ? 200u : 3u};
  ParameterStore store;
  auto fusion = Fusion::declare(store, "fusion", d, in, rng);
  std::vector<Tensor> text;
  for (int i = 0; i < 3; ++i) text.push_back(uniform({in[0]}, rng));
  const auto visual = uniform({in[1]}, rng, 2.0);
  const auto hashtag = uniform({in[2]}, rng);
  auto f = [&](Graph& g) {
    std::vector<Var> h;
    for (const auto& t : text) h.push_back(g.constant(t));
    ModalFeature post[] = {{Modality::Visual, g.constant(visual)},
                           {Modality::Hashtag, g.constant(hashtag)}};
    std::vector<Var> outs;
    for (const auto& tok : fusion.fuse_post(g, h, post)) outs.push_back(tok.vector);
    return readout(g, outs, o.seed + 1);
  };
  auto params = store.all();
  return grad_check(f, params, probe_options(o));
}

GradCheckResult check_emissions(const GradCheckSuiteOptions& o) {
  std::mt19937_64 rng(o.seed);
  const std::size_t d = o.full_size ? 300 : 6;
  ParameterStore store;
  auto head = EmissionHead::declare(store, "emit", d, kNumTags, rng);
  auto& x = store.add("tokens", uniform({4, d}, rng));
  auto f = [&](Graph& g) {
    auto table = g.param(x);
    std::vector<Var> toks;
    for (std::size_t i = 0; i < 4; ++i) toks.push_back(row(table, i));
    auto P = head.emissions(g, toks);
    std::vector<Var> rows;
    for (std::size_t i = 0; i < 4; ++i) rows.push_back(row(P, i));
    return readout(g, rows, o.seed + 1);
  };
  auto params = store.all();
  return grad_check(f, params, probe_options(o));
}

GradCheckResult check_crf(const GradCheckSuiteOptions& o) {
  std::mt19937_64 rng(o.seed);
  ParameterStore store;
  auto& P = store.add("emissions", uniform({5, kNumTags}, rng, 2.0));
  auto& T = store.add("transitions", uniform({kNumTags + 2, kNumTags + 2}, rng));
  const std::vector<std::size_t> gold = {1, 2, 0, 5, 6};
  auto f = [&](Graph& g) { return crf_nll(g.param(P), g.param(T), gold); };
  std::vector<Parameter*> params = {&P, &T};
  return grad_check(f, params, probe_options(o));
}

GradCheckResult check_end_to_end(const GradCheckSuiteOptions& o) {
  const auto posts = toy_posts();
  TrainConfig config;
  config.seed = o.seed;
  const auto dims = o.full_size ? ModelDims{} : small_dims();
  TriModModel model(TriModModel::initialize(dims, config, posts));
  std::mt19937_64 rng(o.seed + 2);
  VisualFeatureStore visual(dims.visual_dim);
  for (const char* id : {"img1", "img2"}) {
    const auto v = uniform({dims.visual_dim}, rng);
    visual.insert(id, {v.values().begin(), v.values().end()});
  }
  const auto prepared = model.prepare(posts, &visual);
  auto f = [&](Graph& g) {
    auto l = model.loss(g, prepared[0]);
    return add(l, model.loss(g, prepared[1]));
  };
  auto params = model.trainable_parameters();
  randomize(params, o.seed + 3);
  model.restore_fixed_transitions();
  return grad_check(f, params, probe_options(o));
}

}  // namespace

const std::vector<std::string>& gradcheck_modules() {
  static const std::vector<std::string> names = {"numeric", "embeddings", "encoders",
                                                 "segmenter", "fusion", "emissions",
                                                 "crf", "end-to-end"};
  return names;
}

GradCheckResult run_gradcheck(std::string_view module, const GradCheckSuiteOptions& options) {
  if (module == "numeric") return check_numeric(options);
  if (module == "embeddings") return check_embeddings(options);
  if (module == "encoders") return check_encoders(options);
  if (module == "segmenter") return check_segmenter(options);
  if (module == "fusion") return check_fusion(options);
  if (module == "emissions") return check_emissions(options);
  if (module == "crf") return check_crf(options);
  if (module == "end-to-end") return check_end_to_end(options);
  throw ContractError("unknown gradcheck module '" + std::string(module) + "'");
}

}  // namespace trimod
