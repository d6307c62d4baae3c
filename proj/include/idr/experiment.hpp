#pragma once

// Experiment configuration files and the end-to-end import / train / eval /
// compare flows behind the command-line tool.
//
// A config is an INI file:
//
//   [data]    corpus, glove, vectors, ngrams, brown, implicit_only, lowercase
//   [model]   kind, pooling, lstm_hidden, lstm_layers, forget_bias, head_layers,
//             hidden_widths, hidden_width_cap, strict_head_rule, word_pairs,
//             word_pair_dim, freeze_encoder, encoder_checkpoint
//   [train]   learning_rate, dropout, batch_size, max_epochs, patience, seed,
//             loss, hinge_margin
//   [output]  dir
//
// Relative paths are resolved against the config file's directory.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "idr/checkpoint.hpp"
#include "idr/classifier.hpp"
#include "idr/corpus.hpp"
#include "idr/train_eval.hpp"

namespace idr {

struct ExperimentConfig {
  std::filesystem::path corpus;
  std::filesystem::path glove;
  std::filesystem::path vectors;
  std::filesystem::path ngrams;
  std::filesystem::path brown;
  std::filesystem::path encoder_checkpoint;
  std::filesystem::path output_dir;
  LoadOptions load;
  ModelConfig model;
  TrainConfig train;

  // Throws config_error: missing required keys, inconsistent model
  // selection, or referenced files that do not exist.
  void validate() const;
};

ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Loads the embeddings / vector source / clusters the model selection needs
// and fills in the data-derived dimensions of `model`.
ModelResources load_resources(ModelConfig& model, const std::filesystem::path& glove,
                              const std::filesystem::path& vectors,
                              const std::filesystem::path& ngrams,
                              const std::filesystem::path& brown);

enum class ImportFormat { pdtb_pipes, conll_json, normalized };
// Throws config_error for an unknown name.
ImportFormat parse_import_format(const std::string& name);

struct ImportResult {
  std::filesystem::path output;
  std::vector<RelationInstance> relations;
  ImportStats stats;
};

// Writes <out_dir>/relations.jsonl.
ImportResult run_import(ImportFormat format, const std::filesystem::path& input,
                        const std::filesystem::path& out_dir, std::optional<Split> split,
                        std::ostream& log);

struct TrainRunResult {
  TrainHistory history;
  EvalReport dev_report;
  std::filesystem::path checkpoint;
};

// Writes checkpoint.bin, history.csv, dev_report.json and dev_report.tsv under
// the output directory (out_override when non-empty).
TrainRunResult run_training(const ExperimentConfig& config, std::optional<std::uint64_t> seed,
                            const std::filesystem::path& out_override, std::ostream& log);

struct EvalRunResult {
  std::optional<EvalReport> model_report;
  std::optional<EvalReport> baseline_report;
};

// Model evaluation writes report.json/report.tsv; the majority-class
// baseline writes baseline_report.json/baseline_report.tsv.
EvalRunResult run_eval(const std::filesystem::path& checkpoint, const std::filesystem::path& corpus,
                       Split split, bool baseline, const std::filesystem::path& out_dir,
                       std::ostream& log);

OverlapStats run_compare(const std::filesystem::path& report_a,
                         const std::filesystem::path& report_b,
                         const std::filesystem::path& out_dir, std::ostream& log);

}  // namespace idr
