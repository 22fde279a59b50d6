#include "trimod/training.hpp"

#include <cstdio>
#include <ostream>
#include <random>

#include "trimod/optimizer.hpp"

namespace trimod {
namespace {

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

}  // namespace

double lr_schedule(std::size_t epoch, const TrainConfig& config) {
  return config.learning_rate / (1.0 + config.lr_decay * static_cast<double>(epoch));
}

double corpus_loss(const TriModModel& model, std::span<const PreparedPost> posts) {
  double total = 0.0;
  std::size_t tokens = 0;
  for (const auto& p : posts) {
    Graph g;
    total += model.loss(g, p).item();
    tokens += p.tokens.size();
  }
  return tokens == 0 ? 0.0 : total / static_cast<double>(tokens);
}

std::vector<std::vector<Tag>> predict_tags(const TriModModel& model,
                                           std::span<const PreparedPost> posts) {
  std::vector<std::vector<Tag>> out;
  out.reserve(posts.size());
  for (const auto& p : posts) out.push_back(model.predict(p).tags);
  return out;
}

EvalReport evaluate(const TriModModel& model, std::span<const PreparedPost> posts,
                    SpanMode mode) {
  EvalReport report{};
  for (const auto& p : posts) {
    if (p.gold.size() != p.tokens.size()) {
      throw ContractError("evaluation needs gold labels for every post");
    }
    std::vector<Tag> gold;
    for (auto y : p.gold) gold.push_back(tag_from_index(y));
    const auto predicted = model.predict(p).tags;
    const auto one = prf1(std::span<const Tag>(gold), std::span<const Tag>(predicted), mode);
    report.overall += one.overall;
    for (std::size_t t = 0; t < kNumEntityTypes; ++t) report.per_type[t] += one.per_type[t];
  }
  return report;
}

double train_group(TriModModel& model, std::span<const PreparedPost* const> group, double lr,
                   const TrainConfig& config, const EmbeddingDropout& dropout) {
  std::size_t tokens = 0;
  for (const auto* p : group) tokens += p->tokens.size();
  if (tokens == 0) return 0.0;
  const double inv = 1.0 / static_cast<double>(tokens);
  double total = 0.0;
  for (const auto* p : group) {
    Graph g;
    auto nll = model.loss(g, *p, dropout);
    total += nll.item();
    g.backward(scale(nll, inv));
  }
  model.mask_fixed_gradients();
  auto params = model.trainable_parameters();
  sgd_step(params, {lr, config.l1, config.l2, config.clip_norm});
  model.restore_fixed_transitions();
  return total;
}

TrainReport train(TriModModel& model, std::span<const PreparedPost> train_posts,
                  std::span<const PreparedPost> dev_posts, const TrainConfig& config,
                  const TrainHooks& hooks) {
  config.validate();
  if (train_posts.empty()) throw ContractError("training set is empty");
  for (const auto& p : train_posts) {
    if (p.gold.size() != p.tokens.size()) {
      throw ContractError("every training post needs one gold label per token");
    }
  }

  const std::size_t first_epoch = model.bundle().epochs_trained;
  std::seed_seq seq{config.seed, static_cast<std::uint64_t>(first_epoch)};
  std::mt19937_64 rng(seq);
  EmbeddingDropout dropout{config.dropout, &rng, hooks.on_dropout};

  TrainReport report;
  std::optional<ParameterStore> best;
  double best_f1 = -1.0;
  std::size_t token_count = 0;
  for (const auto& p : train_posts) token_count += p.tokens.size();

  for (std::size_t e = 0; e < config.epochs; ++e) {
    const std::size_t epoch = first_epoch + e;
    EpochStats stats;
    stats.epoch = epoch;
    stats.learning_rate = lr_schedule(epoch, config);

    const auto batches = split_batches(train_posts.size(), config.batch_size, rng());
    double epoch_loss = 0.0;
    std::vector<const PreparedPost*> group;
    std::size_t batches_in_group = 0;
    for (const auto& batch : batches) {
      for (auto i : batch) group.push_back(&train_posts[i]);
      if (++batches_in_group == config.accumulation_steps) {
        epoch_loss += train_group(model, group, stats.learning_rate, config, dropout);
        group.clear();
        batches_in_group = 0;
      }
    }
    if (!group.empty()) {
      epoch_loss += train_group(model, group, stats.learning_rate, config, dropout);
    }
    stats.mean_loss = epoch_loss / static_cast<double>(token_count);
    model.bundle().epochs_trained = epoch + 1;

    if (!dev_posts.empty()) {
      const auto dev = evaluate(model, dev_posts);
      stats.dev_precision = dev.overall.precision();
      stats.dev_recall = dev.overall.recall();
      stats.dev_f1 = dev.overall.f1();
    }
    if (dev_posts.empty() || stats.dev_f1 > best_f1) {
      best_f1 = stats.dev_f1;
      best = model.bundle().params;
      report.best_epoch = epoch;
      report.best_dev_f1 = stats.dev_f1;
    }
    report.epochs.push_back(stats);
    if (hooks.on_epoch) hooks.on_epoch(stats);
  }
  if (best) {
    model.bundle().params.assign_values(*best);
    model.bundle().epochs_trained = report.best_epoch + 1;
  }
  return report;
}

void print_train_report(std::ostream& out, const TrainReport& report) {
  char line[128];
  std::snprintf(line, sizeof line, "%6s  %10s  %10s  %8s  %8s  %8s\n", "epoch", "lr", "loss",
                "dev P", "dev R", "dev F1");
  out << line;
  for (const auto& e : report.epochs) {
    std::snprintf(line, sizeof line, "%6zu  %10.6f  %10.6f  %8s  %8s  %8s\n", e.epoch,
                  e.learning_rate, e.mean_loss, percent(e.dev_precision).c_str(),
                  percent(e.dev_recall).c_str(), percent(e.dev_f1).c_str());
    out << line;
  }
  out << "best epoch " << report.best_epoch << ", dev F1 " << percent(report.best_dev_f1)
      << "\n";
}

void write_train_report_csv(std::ostream& out, const TrainReport& report) {
  out << "epoch,learning_rate,mean_loss,dev_precision,dev_recall,dev_f1\n";
  char line[160];
  for (const auto& e : report.epochs) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", e.epoch,
                  e.learning_rate, e.mean_loss, e.dev_precision, e.dev_recall, e.dev_f1);
    out << line;
  }
}

std::vector<AblationRow> run_ablation(const ModelBundle& initial,
                                      std::span<const Post> train_posts,
                                      std::span<const Post> dev_posts,
                                      const VisualFeatureStore* visual, TrainConfig base,
                                      const AblationSettings& settings) {
  base.dropout = 0.0;
  base.l1 = 0.0;
  base.l2 = 0.0;
  auto run = [&](const TrainConfig& config) {
    TriModModel model(initial);
    const auto train_set = model.prepare(train_posts, visual);
    const auto dev_set = model.prepare(dev_posts, visual);
    return train(model, train_set, dev_set, config).best_dev_f1;
  };

  const double without = run(base);
  auto with_dropout = base;
  with_dropout.dropout = settings.dropout;
  auto with_l1 = base;
  with_l1.l1 = settings.l1;
  auto with_l2 = base;
  with_l2.l2 = settings.l2;
  return {
      {"Dropout", run(with_dropout), without},
      {"L1 Regularization", run(with_l1), without},
      {"L2 Regularization (Weight Decay)", run(with_l2), without},
      {"Batch Normalization", std::nullopt, without},
  };
}

void print_ablation_table(std::ostream& out, std::span<const AblationRow> rows) {
  char line[160];
  std::snprintf(line, sizeof line, "%-34s  %-30s  %-33s\n", "Regularization Technique",
                "F1 Value (%) with Regularization", "F1 Value (%) without Regularization");
  out << line;
  for (const auto& r : rows) {
    const auto with = r.f1_with ? percent(*r.f1_with) : std::string("not implemented");
    std::snprintf(line, sizeof line, "%-34s  %-30s  %-33s\n", r.technique.c_str(), with.c_str(),
                  percent(r.f1_without).c_str());
    out << line;
  }
}

}  // namespace trimod
