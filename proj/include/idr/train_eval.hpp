#pragma once

// Training loop with dev-based model selection, evaluation under the
// either-sense credit rule, the majority-class baseline and error overlap.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "idr/classifier.hpp"
#include "idr/corpus.hpp"

namespace idr {

enum class LossKind { nll, hinge };

std::string_view to_string(LossKind k);
LossKind parse_loss_kind(std::string_view s);

struct TrainConfig {
  float learning_rate = 0.001f;
  float dropout = 0.35f;
  std::size_t batch_size = 64;
  std::size_t max_epochs = 100;
  std::size_t patience = 10;
  std::uint64_t seed = 1;
  LossKind loss = LossKind::nll;
  float hinge_margin = 1.0f;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double loss = 0;        // mean training loss over the epoch's pairs
  double dev_accuracy = 0;
  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 0: no epoch run
  friend bool operator==(const TrainHistory&, const TrainHistory&) = default;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Minibatch Adam on the expanded training pairs. On return `model` holds the
// parameters of the best-dev epoch (first one on ties).
TrainHistory train(RelationModel& model, const std::vector<RelationInstance>& train_instances,
                   const std::vector<TrainingPair>& pairs,
                   const std::vector<RelationInstance>& dev, const TrainConfig& config,
                   const EpochCallback& on_epoch = {});

struct EvalRecord {
  std::string id;
  std::vector<std::string> gold;
  std::string predicted;
  bool correct = false;
  friend bool operator==(const EvalRecord&, const EvalRecord&) = default;
};

struct SenseCounts {
  std::size_t gold = 0;       // instances carrying the sense
  std::size_t predicted = 0;  // instances predicted as the sense
  std::size_t correct = 0;    // correct predictions of the sense
  friend bool operator==(const SenseCounts&, const SenseCounts&) = default;
};

struct EvalReport {
  double accuracy = 0;
  std::size_t correct = 0;
  std::size_t total = 0;
  // Instances none of whose gold senses is in the model's inventory.
  std::size_t never_predictable = 0;
  std::map<std::string, SenseCounts> per_sense;
  std::vector<EvalRecord> records;
};

// A prediction is correct iff it is one of the instance's gold senses.
EvalReport evaluate_predictions(const std::vector<RelationInstance>& instances,
                                const std::vector<std::string>& predicted,
                                const SenseInventory* inventory = nullptr);

EvalReport evaluate(const RelationModel& model, const std::vector<RelationInstance>& instances);

struct MostCommonClass {
  std::size_t sense = 0;
  std::string label;
  const std::string& predict(const RelationInstance&) const { return label; }
};

// Sense with the most training pairs, lowest index on ties.
MostCommonClass most_common_class(const std::vector<TrainingPair>& pairs,
                                  const SenseInventory& inventory);

EvalReport evaluate(const MostCommonClass& baseline, const std::vector<RelationInstance>& instances,
                    const SenseInventory* inventory = nullptr);

struct OverlapStats {
  std::size_t errors_a = 0;
  std::size_t errors_b = 0;
  std::size_t intersection = 0;
  std::size_t union_size = 0;
  double jaccard = 1.0;  // 1 when both error sets are empty
  std::vector<std::string> shared_ids;  // sorted
};

OverlapStats error_overlap(const EvalReport& a, const EvalReport& b);

// JSON summary (accuracy, counts, per-sense table).
void write_report_json(const EvalReport& report, const std::filesystem::path& path);
// "id\tgold\tpredicted\tcorrect" with a header row; multiple gold senses are
// joined with '|', correct is 1 or 0.
void write_report_tsv(const EvalReport& report, const std::filesystem::path& path);
EvalReport read_report_tsv(const std::filesystem::path& path);

// "epoch,loss,dev_accuracy" with a header row.
void write_history_csv(const TrainHistory& history, const std::filesystem::path& path);
void write_overlap_json(const OverlapStats& stats, const std::filesystem::path& path);

}  // namespace idr
