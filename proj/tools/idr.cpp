// idr: implicit discourse relation sense classification.
//
//   idr import  --format F --corpus IN --out DIR [--split S]
//   idr train   --config PATH [--seed N] [--out DIR]
//   idr eval    [--checkpoint PATH] --corpus PATH --split NAME [--baseline] --out DIR
//   idr compare REPORT_A.tsv REPORT_B.tsv [--out DIR]
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "idr/errors.hpp"
#include "idr/experiment.hpp"

namespace {

constexpr int kRuntimeFailure = 1;
constexpr int kUsageError = 2;

idr::Split split_or_usage(const std::string& name) {
  auto s = idr::parse_split(name);
  if (!s) throw idr::config_error("unknown split '" + name + "' (expected train, dev, test or blind)");
  return *s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Implicit discourse relation sense classifier"};
  app.require_subcommand(1);

  std::string format, corpus, out, split, config, checkpoint;
  std::optional<std::uint64_t> seed;
  bool baseline = false;
  std::string report_a, report_b;

  auto* import_cmd = app.add_subcommand("import", "Convert a corpus into normalized JSONL");
  import_cmd->add_option("--format", format, "pdtb-pipes | conll-json | normalized")->required();
  import_cmd->add_option("--corpus", corpus, "Input file or directory")->required();
  import_cmd->add_option("--out", out, "Output directory")->required();
  import_cmd->add_option("--split", split, "Stamp this split on every imported relation");

  auto* train_cmd = app.add_subcommand("train", "Train a model from an experiment config");
  train_cmd->add_option("--config", config, "Experiment config (INI)")->required();
  train_cmd->add_option("--seed", seed, "Override the config's seed");
  train_cmd->add_option("--out", out, "Override the config's output directory");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint and/or the baseline");
  eval_cmd->add_option("--checkpoint", checkpoint, "Model checkpoint");
  eval_cmd->add_option("--corpus", corpus, "Normalized relation JSONL")->required();
  eval_cmd->add_option("--split", split, "train | dev | test | blind")->required();
  eval_cmd->add_flag("--baseline", baseline, "Also report the most-common-class baseline");
  eval_cmd->add_option("--out", out, "Output directory")->required();

  auto* compare_cmd = app.add_subcommand("compare", "Error overlap between two evaluation reports");
  compare_cmd->add_option("report_a", report_a, "First report (TSV)")->required();
  compare_cmd->add_option("report_b", report_b, "Second report (TSV)")->required();
  compare_cmd->add_option("--out", out, "Write overlap.json here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*import_cmd) {
      std::optional<idr::Split> s;
      if (!split.empty()) s = split_or_usage(split);
      idr::run_import(idr::parse_import_format(format), corpus, out, s, std::cout);
    } else if (*train_cmd) {
      const auto cfg = idr::load_experiment_config(config);
      idr::run_training(cfg, seed, out, std::cout);
    } else if (*eval_cmd) {
      idr::run_eval(checkpoint, corpus, split_or_usage(split), baseline, out, std::cout);
    } else if (*compare_cmd) {
      idr::run_compare(report_a, report_b, out, std::cout);
    }
  } catch (const idr::config_error& e) {
    std::cerr << "idr: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "idr: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return 0;
}
