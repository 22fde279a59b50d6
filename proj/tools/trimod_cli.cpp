// trimod: train, evaluate and run the multimodal tagger from the shell.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "trimod/corpus.hpp"
#include "trimod/embeddings.hpp"
#include "trimod/gradcheck_suite.hpp"
#include "trimod/model_io.hpp"
#include "trimod/training.hpp"

namespace {

using namespace trimod;

constexpr int kExitNumeric = 1;
constexpr int kExitUsage = 2;

struct TrainArgs {
  std::string train_path, dev_path, visual_path, vectors_path, config_path, wordlist_path;
  std::string out_path = "model.trimod";
  std::string report_path, resume_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> lr, lr_decay, dropout, l1, l2, clip_norm;
  std::optional<std::size_t> batch_size, k_steps, epochs;
  std::size_t segmenter_examples = 1000;
  std::size_t segmenter_epochs = 20;
  double segmenter_lr = 0.01;
  bool text_only = false;
  bool no_constraints = false;
  bool ablation = false;
  bool quiet = false;
};

struct EvalArgs {
  std::string model_path, test_path, visual_path, csv_path;
  bool per_category = false;
  bool strict = false;
};

struct PredictArgs {
  std::string model_path, input_path, visual_path;
  bool explain = false;
};

struct SegmentArgs {
  std::string model_path;
  bool heuristic = false;
};

struct GradcheckArgs {
  std::string module = "all";
  double eps = 1e-5;
  std::uint64_t seed = 11;
  bool full = false;
};

struct StatsArgs {
  std::vector<std::string> corpora;
};

std::optional<VisualFeatureStore> maybe_visual(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return load_visual_features(std::filesystem::path(path));
}

template <class T>
void override_if(const std::optional<T>& value, T& target) {
  if (value) target = *value;
}

int cmd_train(const TrainArgs& a) {
  TrainConfig config;
  ModelDims dims;
  if (!a.config_path.empty()) apply_config(read_key_values(a.config_path), config, dims, a.config_path);
  override_if(a.seed, config.seed);
  override_if(a.lr, config.learning_rate);
  override_if(a.lr_decay, config.lr_decay);
  override_if(a.dropout, config.dropout);
  override_if(a.l1, config.l1);
  override_if(a.l2, config.l2);
  override_if(a.clip_norm, config.clip_norm);
  override_if(a.batch_size, config.batch_size);
  override_if(a.k_steps, config.accumulation_steps);
  override_if(a.epochs, config.epochs);
  if (a.text_only) dims.use_visual = dims.use_hashtags = false;
  if (a.no_constraints) dims.bio_constraints = false;
  config.validate();

  const auto train_posts = parse_corpus(std::filesystem::path(a.train_path));
  const auto dev_posts = parse_corpus(std::filesystem::path(a.dev_path));
  if (train_posts.empty()) throw ParseError(a.train_path + ": no posts");
  const auto visual = maybe_visual(a.visual_path);
  if (visual) dims.visual_dim = visual->dim();

  ModelBundle bundle;
  if (!a.resume_path.empty()) {
    bundle = load_bundle(std::filesystem::path(a.resume_path));
    bundle.config = config;
  } else {
    std::optional<WordVectors> vectors;
    if (!a.vectors_path.empty()) vectors = read_word_vectors(std::filesystem::path(a.vectors_path));
    std::vector<std::string> wordlist;
    if (!a.wordlist_path.empty()) wordlist = load_wordlist(a.wordlist_path);
    bundle = TriModModel::initialize(dims, config, train_posts, vectors ? &*vectors : nullptr,
                                     wordlist);
    if (!wordlist.empty()) {
      TriModModel staging(std::move(bundle));
      const auto examples = make_synthetic_pairs(wordlist, a.segmenter_examples, config.seed);
      SegmenterTrainConfig seg;
      seg.epochs = a.segmenter_epochs;
      seg.learning_rate = a.segmenter_lr;
      seg.seed = config.seed;
      const auto seg_report = train_segmenter(*staging.segmenter(), examples, seg);
      if (!a.quiet) {
        spdlog::info("segmenter trained: boundary accuracy {:.4f}",
                     seg_report.epoch_accuracy.back());
      }
      bundle = std::move(staging.bundle());
    }
  }

  if (a.ablation) {
    const auto rows = run_ablation(bundle, train_posts, dev_posts, visual ? &*visual : nullptr,
                                   config);
    print_ablation_table(std::cout, rows);
    return 0;
  }

  TriModModel model(std::move(bundle));
  const auto vis = visual ? &*visual : nullptr;
  const auto train_set = model.prepare(train_posts, vis);
  const auto dev_set = model.prepare(dev_posts, vis);
  TrainHooks hooks;
  if (!a.quiet) {
    hooks.on_epoch = [](const EpochStats& e) {
      spdlog::info("epoch {} lr {:.6f} loss {:.6f} dev F1 {:.4f}", e.epoch, e.learning_rate,
                   e.mean_loss, e.dev_f1);
    };
  }
  const auto report = train(model, train_set, dev_set, config, hooks);
  print_train_report(std::cout, report);

  save_bundle(model.bundle(), std::filesystem::path(a.out_path));
  const auto report_path = a.report_path.empty() ? a.out_path + ".report.csv" : a.report_path;
  std::ofstream csv(report_path);
  if (!csv) throw std::runtime_error("cannot write " + report_path);
  write_train_report_csv(csv, report);
  return 0;
}

int cmd_eval(const EvalArgs& a) {
  TriModModel model(load_bundle(std::filesystem::path(a.model_path)));
  const auto posts = parse_corpus(std::filesystem::path(a.test_path));
  const auto visual = maybe_visual(a.visual_path);
  const auto prepared = model.prepare(posts, visual ? &*visual : nullptr);
  const auto predicted = predict_tags(model, prepared);
  const auto report = prf1(posts, predicted, a.strict ? SpanMode::Strict : SpanMode::Lenient);
  print_report(std::cout, report, a.per_category);
  if (!a.csv_path.empty()) {
    std::ofstream csv(a.csv_path);
    if (!csv) throw std::runtime_error("cannot write " + a.csv_path);
    write_report_csv(csv, report);
  }
  return 0;
}

int cmd_predict(const PredictArgs& a) {
  TriModModel model(load_bundle(std::filesystem::path(a.model_path)));
  const auto posts = parse_corpus(std::filesystem::path(a.input_path));
  const auto visual = maybe_visual(a.visual_path);
  char buf[96];
  for (std::size_t i = 0; i < posts.size(); ++i) {
    const auto& post = posts[i];
    const auto pred = model.predict(model.prepare(post, visual ? &*visual : nullptr));
    if (i > 0) std::cout << '\n';
    if (post.image_id) std::cout << "# img: " << *post.image_id << '\n';
    for (std::size_t t = 0; t < post.tokens.size(); ++t) {
      std::cout << post.tokens[t];
      if (post.has_tags()) std::cout << '\t' << tag_name(post.tags[t]);
      std::cout << '\t' << tag_name(pred.tags[t]);
      if (a.explain) {
        const auto& w = pred.attention[t];
        std::snprintf(buf, sizeof buf, "\t%.6f\t%.6f\t%.6f", w[0], w[1], w[2]);
        std::cout << buf;
      }
      std::cout << '\n';
    }
  }
  return 0;
}

int cmd_segment(const SegmentArgs& a) {
  std::optional<TriModModel> model;
  if (!a.heuristic) {
    model.emplace(load_bundle(std::filesystem::path(a.model_path)));
    if (!model->segmenter()) {
      throw ParseError(a.model_path + ": model has no trained segmenter (use --heuristic)");
    }
  }
  std::string line;
  while (std::getline(std::cin, line)) {
    auto tag = std::string(trim(line));
    if (!tag.empty() && tag.front() == '#') tag.erase(0, 1);
    if (tag.empty()) {
      std::cout << '\n';
      continue;
    }
    const auto words = model ? model->segmenter()->segment(tag) : heuristic_segment(tag);
    for (std::size_t i = 0; i < words.size(); ++i) std::cout << (i ? " " : "") << words[i];
    std::cout << '\n';
  }
  return 0;
}

int cmd_gradcheck(const GradcheckArgs& a) {
  std::vector<std::string> modules;
  if (a.module == "all") {
    modules = gradcheck_modules();
  } else {
    modules.push_back(a.module);
  }
  GradCheckSuiteOptions options;
  options.eps = a.eps;
  options.full_size = a.full;
  options.seed = a.seed;
  bool ok = true;
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %14s %8s  %s\n", "module", "max rel err", "coords",
                "worst coordinate (analytic / numeric)");
  std::cout << line;
  for (const auto& m : modules) {
    const auto r = run_gradcheck(m, options);
    const bool pass = r.max_relative_error < 1e-4;
    ok = ok && pass;
    std::snprintf(line, sizeof line, "%-12s %14.3e %8zu  %s[%zu] (%.6e / %.6e) %s\n",
                  m.c_str(), r.max_relative_error, r.coordinates_checked,
                  r.worst_parameter.c_str(), r.worst_index, r.worst_analytic, r.worst_numeric,
                  pass ? "ok" : "FAIL");
    std::cout << line;
  }
  return ok ? 0 : kExitNumeric;
}

int cmd_stats(const StatsArgs& a) {
  std::vector<CorpusStats> stats;
  for (const auto& path : a.corpora) stats.push_back(corpus_stats(parse_corpus(std::filesystem::path(path))));
  std::printf("%-14s", "Entity Type");
  for (const auto& path : a.corpora) std::printf("  %12s", std::filesystem::path(path).filename().c_str());
  std::printf("\n");
  for (auto type : kEntityTypes) {
    std::printf("%-14s", std::string(entity_long_name(type)).c_str());
    for (const auto& s : stats) std::printf("  %12zu", s.of(type));
    std::printf("\n");
  }
  std::printf("%-14s", "Total");
  for (const auto& s : stats) std::printf("  %12zu", s.total());
  std::printf("\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_st("trimod"));

  CLI::App app{"Multimodal named entity tagger"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "Train a model");
  train_cmd->add_option("--train", ta.train_path, "Training corpus")->required();
  train_cmd->add_option("--dev", ta.dev_path, "Development corpus")->required();
  train_cmd->add_option("--visual", ta.visual_path, "Visual feature file");
  train_cmd->add_option("--word-vectors", ta.vectors_path, "Pretrained word vectors");
  train_cmd->add_option("--config", ta.config_path, "key = value configuration file");
  train_cmd->add_option("--seed", ta.seed, "Random seed");
  train_cmd->add_option("--out", ta.out_path, "Model output path")->capture_default_str();
  train_cmd->add_option("--report", ta.report_path, "Train report CSV (default <out>.report.csv)");
  train_cmd->add_option("--resume", ta.resume_path, "Continue training a saved model");
  train_cmd->add_option("--lr", ta.lr, "Learning rate");
  train_cmd->add_option("--lr-decay", ta.lr_decay, "Learning rate decay");
  train_cmd->add_option("--dropout", ta.dropout, "Embedding dropout rate");
  train_cmd->add_option("--l1", ta.l1, "L1 coefficient");
  train_cmd->add_option("--l2", ta.l2, "L2 coefficient");
  train_cmd->add_option("--clip-norm", ta.clip_norm, "Gradient norm clip (0 disables)");
  train_cmd->add_option("--batch-size", ta.batch_size, "Posts per batch");
  train_cmd->add_option("--k-steps", ta.k_steps, "Batches accumulated per update");
  train_cmd->add_option("--epochs", ta.epochs, "Training epochs");
  train_cmd->add_option("--wordlist", ta.wordlist_path, "Train a hashtag segmenter on this word list");
  train_cmd->add_option("--segmenter-examples", ta.segmenter_examples, "Synthetic segmenter examples")
      ->capture_default_str();
  train_cmd->add_option("--segmenter-epochs", ta.segmenter_epochs, "Segmenter training epochs")
      ->capture_default_str();
  train_cmd->add_option("--segmenter-lr", ta.segmenter_lr, "Segmenter learning rate")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  train_cmd->add_flag("--text-only", ta.text_only, "Disable visual and hashtag features");
  train_cmd->add_flag("--no-constraints", ta.no_constraints, "Disable BIO2 transition constraints");
  train_cmd->add_flag("--ablation", ta.ablation, "Run the regularization comparison instead");
  train_cmd->add_flag("--quiet", ta.quiet, "No per-epoch progress");

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "Score a model on an annotated corpus");
  eval_cmd->add_option("--model", ea.model_path, "Model file")->required();
  eval_cmd->add_option("--test", ea.test_path, "Annotated corpus")->required();
  eval_cmd->add_option("--visual", ea.visual_path, "Visual feature file");
  eval_cmd->add_option("--csv", ea.csv_path, "Also write the report as CSV");
  eval_cmd->add_flag("--per-category", ea.per_category, "One row per entity category");
  eval_cmd->add_flag("--strict", ea.strict, "Drop orphan I- tags instead of repairing them");

  PredictArgs pa;
  auto* predict_cmd = app.add_subcommand("predict", "Tag a corpus");
  predict_cmd->add_option("--model", pa.model_path, "Model file")->required();
  predict_cmd->add_option("--input", pa.input_path, "Corpus to tag")->required();
  predict_cmd->add_option("--visual", pa.visual_path, "Visual feature file");
  predict_cmd->add_flag("--explain", pa.explain, "Append text/visual/hashtag attention weights");

  SegmentArgs sa;
  auto* segment_cmd = app.add_subcommand("segment", "Split hashtags read from standard input");
  auto* seg_model = segment_cmd->add_option("--model", sa.model_path, "Model with a segmenter");
  auto* seg_heur = segment_cmd->add_flag("--heuristic", sa.heuristic, "Use the camel-case rules");
  seg_model->excludes(seg_heur);
  segment_cmd->require_option(1);

  GradcheckArgs ga;
  auto* grad_cmd = app.add_subcommand("gradcheck", "Compare gradients with finite differences");
  grad_cmd->add_option("--module", ga.module, "Module name or 'all'")->capture_default_str();
  grad_cmd->add_option("--eps", ga.eps, "Finite difference step")->capture_default_str();
  grad_cmd->add_option("--seed", ga.seed, "Seed for the random instances")->capture_default_str();
  grad_cmd->add_flag("--full", ga.full, "Full-size dimensions, sampled coordinates");

  StatsArgs st;
  auto* stats_cmd = app.add_subcommand("stats", "Entity counts per category");
  stats_cmd->add_option("--corpus", st.corpora, "Corpus file (repeatable)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(ta);
    if (*eval_cmd) return cmd_eval(ea);
    if (*predict_cmd) return cmd_predict(pa);
    if (*segment_cmd) return cmd_segment(sa);
    if (*grad_cmd) return cmd_gradcheck(ga);
    if (*stats_cmd) return cmd_stats(st);
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
