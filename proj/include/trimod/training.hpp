#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trimod/evaluation.hpp"
#include "trimod/model.hpp"

namespace trimod {

/// learning_rate / (1 + lr_decay * epoch), epochs counted from 0.
double lr_schedule(std::size_t epoch, const TrainConfig& config);

struct EpochStats {
  std::size_t epoch = 0;
  double learning_rate = 0.0;
  /// Mean per-token CRF loss over the epoch's training updates.
  double mean_loss = 0.0;
  double dev_precision = 0.0;
  double dev_recall = 0.0;
  double dev_f1 = 0.0;

  friend bool operator==(const EpochStats&, const EpochStats&) = default;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  /// Epoch whose parameters the model holds after training.
  std::size_t best_epoch = 0;
  double best_dev_f1 = 0.0;

  friend bool operator==(const TrainReport&, const TrainReport&) = default;
};

struct TrainHooks {
  std::function<void(const EpochStats&)> on_epoch;
  /// Forwarded to EmbeddingDropout::on_apply.
  std::function<void(std::string_view site)> on_dropout;
};

/// Mean per-token loss over `posts` at inference (no dropout, no update).
double corpus_loss(const TriModModel& model, std::span<const PreparedPost> posts);

std::vector<std::vector<Tag>> predict_tags(const TriModModel& model,
                                           std::span<const PreparedPost> posts);

/// Scores the model against the gold labels carried by `posts`.
EvalReport evaluate(const TriModModel& model, std::span<const PreparedPost> posts,
                    SpanMode mode = SpanMode::Lenient);

/// Accumulates gradients of sum(nll) / (tokens in `group`) over every post of
/// the group, then takes one SGD step. Returns the summed, unscaled nll.
double train_group(TriModModel& model, std::span<const PreparedPost* const> group, double lr,
                   const TrainConfig& config, const EmbeddingDropout& dropout);

/// Runs config.epochs epochs starting after bundle().epochs_trained. Each
/// epoch shuffles the posts into batches, takes one update per
/// accumulation_steps batches (a trailing partial group is still applied),
/// then scores `dev`. The model ends holding the parameters of the epoch with
/// the best dev F1 (earliest on ties; the last epoch when `dev` is empty).
TrainReport train(TriModModel& model, std::span<const PreparedPost> train_posts,
                  std::span<const PreparedPost> dev_posts, const TrainConfig& config,
                  const TrainHooks& hooks = {});

void print_train_report(std::ostream& out, const TrainReport& report);
/// `epoch,learning_rate,mean_loss,dev_precision,dev_recall,dev_f1` rows.
void write_train_report_csv(std::ostream& out, const TrainReport& report);

/// One row of the regularization comparison.
struct AblationRow {
  std::string technique;
  /// Empty when the technique is not available.
  std::optional<double> f1_with;
  double f1_without = 0.0;
};

struct AblationSettings {
  double dropout = 0.55;
  double l1 = 1e-5;
  double l2 = 1e-4;
};

/// Trains a copy of `initial` once with every regularizer off, then once with
/// each of dropout, L1 and L2 enabled alone, reporting best dev F1 for each.
std::vector<AblationRow> run_ablation(const ModelBundle& initial,
                                      std::span<const Post> train_posts,
                                      std::span<const Post> dev_posts,
                                      const VisualFeatureStore* visual, TrainConfig base,
                                      const AblationSettings& settings = {});

void print_ablation_table(std::ostream& out, std::span<const AblationRow> rows);

}  // namespace trimod
