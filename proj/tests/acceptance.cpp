// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run all criteria
//   acceptance 1 3 10     run a subset

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "crf_oracle.hpp"
#include "metric_cases.hpp"
#include "trimod/crf.hpp"
#include "trimod/gradcheck_suite.hpp"
#include "trimod/model.hpp"
#include "trimod/training.hpp"

namespace fs = std::filesystem;
using namespace trimod;

namespace {

const fs::path kData = TRIMOD_DATA_DIR;

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Tensor uniform(Shape shape, std::mt19937_64& rng, double bound) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = dist(rng);
  return t;
}

int run_cli(const std::string& args, std::string* out = nullptr) {
  const std::string cmd = std::string(TRIMOD_CLI) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return -1;
  std::string text;
  std::array<char, 4096> buf;
  while (auto n = std::fread(buf.data(), 1, buf.size(), pipe)) text.append(buf.data(), n);
  const int status = pclose(pipe);
  if (out) *out = std::move(text);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

fs::path scratch_dir() {
  auto dir = fs::temp_directory_path() / ("trimod_accept_" + std::to_string(getpid()));
  fs::create_directories(dir);
  return dir;
}

// 1 -------------------------------------------------------------------------
Outcome crf_oracle_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  std::size_t mismatched = 0;
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = 1 + k % 4;
    const auto P = uniform({n, kNumTags}, rng, 3.0);
    const auto T = uniform({kNumTags + 2, kNumTags + 2}, rng, 3.0);
    const double z = crf::log_partition(P, T);
    const double z_ref = oracle::log_partition(P, T);
    worst = std::max(worst, std::abs(z - z_ref) / std::abs(z_ref));
    mismatched += crf::viterbi_decode(P, T).labels != oracle::argmax(P, T).labels;
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-10 && mismatched == 0 && secs < 10.0,
          "max rel logZ err " + fmt("%.2e", worst) + ", viterbi mismatches " +
              std::to_string(mismatched) + "/200, " + fmt("%.2f s", secs)};
}

// 2 -------------------------------------------------------------------------
Outcome gradient_integrity() {
  const auto t0 = Clock::now();
  GradCheckSuiteOptions options;
  options.eps = 1e-5;
  double worst = 0.0;
  std::string worst_module;
  for (const auto& m : gradcheck_modules()) {
    const auto r = run_gradcheck(m, options);
    if (r.max_relative_error >= worst) {
      worst = r.max_relative_error;
      worst_module = m;
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 60.0,
          "worst " + fmt("%.2e", worst) + " (" + worst_module + "), " + fmt("%.2f s", secs)};
}

// 3 -------------------------------------------------------------------------
Outcome fusion_properties() {
  std::mt19937_64 rng(303);
  ParameterStore store;
  const ModelDims dims;
  auto fusion = Fusion::declare(store, "fusion", dims.fused_dim,
                                {dims.text_dim(), dims.visual_dim, dims.word_dim}, rng);
  std::size_t bad_weights = 0, outside_hull = 0, not_invariant = 0;
  double worst_sum = 0.0;
  for (int k = 0; k < 1000; ++k) {
    Graph g;
    const ModalFeature features[] = {
        {Modality::Text, g.constant(uniform({dims.text_dim()}, rng, 1.0))},
        {Modality::Visual, g.constant(uniform({dims.visual_dim}, rng, 3.0))},
        {Modality::Hashtag, g.constant(uniform({dims.word_dim}, rng, 1.0))}};
    std::vector<Var> projected;
    for (const auto& f : features) projected.push_back(fusion.project(g, f));
    const auto out = fusion.combine(g, projected);

    double total = 0.0;
    for (double w : out.weights) {
      bad_weights += !(w > 0.0);
      total += w;
    }
    worst_sum = std::max(worst_sum, std::abs(total - 1.0));
    const auto& v = out.vector.value();
    for (std::size_t i = 0; i < v.size(); ++i) {
      double lo = projected[0].value()[i], hi = lo;
      for (const auto& p : projected) {
        lo = std::min(lo, p.value()[i]);
        hi = std::max(hi, p.value()[i]);
      }
      outside_hull += v[i] < lo || v[i] > hi;
    }
    std::array<std::size_t, 3> perm = {0, 1, 2};
    while (std::next_permutation(perm.begin(), perm.end())) {
      std::vector<Var> permuted;
      for (auto i : perm) permuted.push_back(projected[i]);
      const auto p = fusion.combine(g, permuted);
      bool same = p.vector.value() == v;
      for (std::size_t i = 0; i < 3; ++i) same &= p.weights[i] == out.weights[perm[i]];
      not_invariant += !same;
    }
  }
  return {bad_weights == 0 && worst_sum <= 1e-9 && outside_hull == 0 && not_invariant == 0,
          "non-positive weights " + std::to_string(bad_weights) + ", max |sum-1| " +
              fmt("%.1e", worst_sum) + ", hull violations " + std::to_string(outside_hull) +
              ", permutation mismatches " + std::to_string(not_invariant)};
}

// 4 -------------------------------------------------------------------------
Outcome memorization() {
  const auto t0 = Clock::now();
  const auto posts = parse_corpus(kData / "memorize.txt");
  const auto visual = load_visual_features(kData / "memorize_visual.txt");
  ModelDims dims;
  dims.visual_dim = visual.dim();
  const TrainConfig config;  // library defaults, 200 epochs
  TriModModel model(TriModModel::initialize(dims, config, posts));
  const auto prepared = model.prepare(posts, &visual);
  train(model, prepared, prepared, config);
  const double f1 = evaluate(model, prepared).overall.f1();
  const double secs = seconds_since(t0);
  return {f1 >= 0.99 && secs < 600.0,
          "train F1 " + fmt("%.4f", f1) + " after " + std::to_string(config.epochs) +
              " epochs (lr " + fmt("%g", config.learning_rate) + ", batch " +
              std::to_string(config.batch_size) + ", k " +
              std::to_string(config.accumulation_steps) + ", dropout " +
              fmt("%g", config.dropout) + "), " + fmt("%.1f s", secs)};
}

// 5 -------------------------------------------------------------------------
TrainConfig signal_config() {
  TrainConfig c;
  c.learning_rate = 0.2;
  c.lr_decay = 0.0;
  c.batch_size = 1;
  c.accumulation_steps = 1;
  c.dropout = 0.0;
  c.epochs = 8;
  return c;
}

Outcome multimodal_signal() {
  const auto train_posts = parse_corpus(kData / "signal_train.txt");
  const auto dev_posts = parse_corpus(kData / "signal_dev.txt");
  const auto visual = load_visual_features(kData / "signal_visual.txt");
  auto run = [&](bool fused) {
    ModelDims dims;
    dims.visual_dim = visual.dim();
    dims.use_visual = fused;
    dims.use_hashtags = fused;
    const auto config = signal_config();
    TriModModel model(TriModModel::initialize(dims, config, train_posts));
    const auto tr = model.prepare(train_posts, &visual);
    const auto dev = model.prepare(dev_posts, &visual);
    train(model, tr, dev, config);
    return evaluate(model, dev).overall.f1();
  };
  const double with_fusion = run(true);
  const double text_only = run(false);
  const double gap = 100.0 * (with_fusion - text_only);
  return {gap >= 20.0, "dev F1 fused " + fmt("%.2f", 100 * with_fusion) + ", text-only " +
                           fmt("%.2f", 100 * text_only) + ", gap " + fmt("%.2f", gap) +
                           " points"};
}

// 6 -------------------------------------------------------------------------
Outcome hashtag_segmenter() {
  const auto t0 = Clock::now();
  const auto words = load_wordlist(kData / "words200.txt");
  const auto train_set = make_synthetic_pairs(words, 1000, 601);
  const auto held_out = make_synthetic_pairs(words, 300, 602);
  std::mt19937_64 rng(603);
  ParameterStore store;
  auto model = Segmenter::declare(store, "seg", segmenter_alphabet(words), {}, rng);
  SegmenterTrainConfig config;
  config.learning_rate = 0.05;
  train_segmenter(model, train_set, config);
  const double acc = boundary_accuracy(model, held_out);

  std::uniform_int_distribution<std::size_t> pick_word(0, words.size() - 1);
  std::uniform_int_distribution<int> pick_len(1, 5);
  const std::vector<std::string> noise = {"A", "Z", "9", "_", "\xC3\xA9", "\xF0\x9F\x94\xA5"};
  std::uniform_int_distribution<std::size_t> pick_noise(0, noise.size() - 1);
  std::size_t violations = 0;
  for (int k = 0; k < 10000; ++k) {
    std::string text;
    for (int i = pick_len(rng); i > 0; --i) {
      text += rng() % 4 == 0 ? noise[pick_noise(rng)] : words[pick_word(rng)];
    }
    if (k % 2 == 1 && !text.empty()) text[0] = static_cast<char>(std::toupper(text[0]));
    std::string joined;
    for (const auto& w : model.segment(text)) joined += w;
    violations += joined != text;
  }
  return {acc >= 0.95 && violations == 0,
          "held-out boundary accuracy " + fmt("%.4f", acc) + ", concat violations " +
              std::to_string(violations) + "/10000, " + fmt("%.1f s", seconds_since(t0))};
}

// 7 -------------------------------------------------------------------------
Outcome dimensional_contract() {
  const auto posts = parse_corpus(kData / "memorize.txt");
  TriModModel model(TriModModel::initialize(ModelDims{}, TrainConfig{}, posts));
  const auto post = model.prepare(posts.front());
  Graph g;
  const auto& enc = model.encoder();
  auto chars = enc.chars().embed(g, post.tokens.front());
  const auto char_len = char_encode(g, enc.char_gru(), chars).size();
  const auto token_len = enc.token_represent(g, post.tokens.front()).size();
  const auto gt = enc.encode(g, post.tokens);
  std::set<std::size_t> gt_lens;
  for (const auto& h : gt) gt_lens.insert(h.size());
  const auto P = model.emissions(g, post).value().shape();
  const auto T = model.transitions().value.shape();
  const bool ok = char_len == 60 && token_len == 260 && gt_lens == std::set<std::size_t>{300} &&
                  P == Shape{post.tokens.size(), 9} && T == Shape{11, 11};
  return {ok, "char " + std::to_string(char_len) + ", token " + std::to_string(token_len) +
                  ", GT " + std::to_string(*gt_lens.begin()) + ", emissions " +
                  shape_to_string(P) + ", transitions " + shape_to_string(T)};
}

// 8 -------------------------------------------------------------------------
Outcome ablation_harness() {
  const auto dir = scratch_dir();
  std::string out;
  const int code = run_cli("train --ablation --quiet --train " + (kData / "signal_train.txt").string() +
                               " --dev " + (kData / "signal_dev.txt").string() + " --visual " +
                               (kData / "signal_visual.txt").string() + " --out " +
                               (dir / "ablation.trimod").string() +
                               " --lr 0.2 --lr-decay 0 --batch-size 1 --k-steps 1 --epochs 6",
                           &out);
  fs::remove_all(dir);
  std::istringstream lines(out);
  std::vector<std::string> rows;
  for (std::string line; std::getline(lines, line);) {
    if (!trim(line).empty()) rows.push_back(line);
  }
  const std::vector<std::string> names = {"Dropout", "L1 Regularization",
                                          "L2 Regularization (Weight Decay)",
                                          "Batch Normalization"};
  bool shape = code == 0 && rows.size() == 5 &&
               rows[0].starts_with("Regularization Technique") &&
               rows[0].find("F1 Value (%) with Regularization") != std::string::npos &&
               rows[0].find("F1 Value (%) without Regularization") != std::string::npos;
  double worst_gap = 0.0;
  std::string values;
  for (std::size_t i = 0; shape && i < names.size(); ++i) {
    shape &= rows[i + 1].starts_with(names[i]);
    std::istringstream cells(rows[i + 1].substr(names[i].size()));
    std::string a, b;
    cells >> a >> b;
    if (a == "not") continue;  // "not implemented"
    const double with = std::stod(a), without = std::stod(b);
    worst_gap = std::max(worst_gap, std::abs(with - without));
    values += (values.empty() ? "" : ", ") + names[i] + " " + a + "/" + b;
  }
  return {shape && worst_gap <= 20.0, "exit " + std::to_string(code) + ", " +
                                          std::to_string(rows.size()) + " table rows, " +
                                          values + ", max |with-without| " +
                                          fmt("%.2f", worst_gap)};
}

// 9 -------------------------------------------------------------------------
Outcome determinism() {
  const auto dir = scratch_dir();
  auto train_once = [&](const std::string& tag) {
    return run_cli("train --quiet --seed 9 --epochs 5 --train " +
                   (kData / "memorize.txt").string() + " --dev " +
                   (kData / "memorize.txt").string() + " --visual " +
                   (kData / "memorize_visual.txt").string() + " --out " +
                   (dir / (tag + ".trimod")).string() + " --report " +
                   (dir / (tag + ".csv")).string());
  };
  const int a = train_once("a");
  const int b = train_once("b");
  const auto model_a = slurp(dir / "a.trimod"), model_b = slurp(dir / "b.trimod");
  const auto report_a = slurp(dir / "a.csv"), report_b = slurp(dir / "b.csv");
  fs::remove_all(dir);
  const bool ok = a == 0 && b == 0 && !model_a.empty() && model_a == model_b &&
                  !report_a.empty() && report_a == report_b;
  return {ok, "exit " + std::to_string(a) + "/" + std::to_string(b) + ", bundle " +
                  std::to_string(model_a.size()) + " bytes " +
                  (model_a == model_b ? "identical" : "DIFFERENT") + ", report " +
                  (report_a == report_b ? "identical" : "DIFFERENT")};
}

// 10 ------------------------------------------------------------------------
Outcome metric_correctness() {
  std::size_t matched = 0;
  const auto& cases = metric_cases::cases();
  for (const auto& c : cases) {
    const auto r = prf1(metric_cases::tags(c.gold), metric_cases::tags(c.predicted), c.mode);
    const auto& m = r.overall;
    matched += m.gold == c.gold_spans && m.predicted == c.predicted_spans &&
               m.correct == c.correct && m.precision() == c.precision &&
               m.recall() == c.recall && m.f1() == c.f1;
  }
  return {matched == cases.size() && cases.size() == 20,
          std::to_string(matched) + "/" + std::to_string(cases.size()) +
              " hand-computed cases exact (incl. P=0.5 R=2/3 F1=" + fmt("%.4f", 4.0 / 7.0) +
              ")"};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::err);
  const std::vector<Criterion> all = {
      {1, "CRF oracle equivalence", crf_oracle_equivalence},
      {2, "gradient integrity", gradient_integrity},
      {3, "fusion properties", fusion_properties},
      {4, "memorization at defaults", memorization},
      {5, "multimodal signal", multimodal_signal},
      {6, "hashtag segmenter", hashtag_segmenter},
      {7, "dimensional contract", dimensional_contract},
      {8, "regularization ablation harness", ablation_harness},
      {9, "determinism", determinism},
      {10, "metric correctness", metric_correctness},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!selected.empty() && !selected.contains(c.id)) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name
              << "): " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
