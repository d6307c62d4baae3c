#include "idr/experiment.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "text_util.hpp"

namespace idr {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

// ---------------------------------------------------------------- config

namespace {

const std::map<std::string, std::set<std::string>> kKnownKeys = {
    {"data", {"corpus", "glove", "vectors", "ngrams", "brown", "implicit_only", "lowercase"}},
    {"model",
     {"kind", "pooling", "lstm_hidden", "lstm_layers", "forget_bias", "head_layers",
      "hidden_widths", "hidden_width_cap", "strict_head_rule", "word_pairs", "word_pair_dim",
      "freeze_encoder", "encoder_checkpoint"}},
    {"train",
     {"learning_rate", "dropout", "batch_size", "max_epochs", "patience", "seed", "loss",
      "hinge_margin"}},
    {"output", {"dir"}},
};

class Section {
 public:
  Section(const pt::ptree& root, std::string name, std::string source)
      : name_(std::move(name)), source_(std::move(source)) {
    if (auto child = root.get_child_optional(name_)) tree_ = *child;
  }

  std::optional<std::string> text(const std::string& key) const {
    auto v = tree_.get_optional<std::string>(key);
    if (!v) return std::nullopt;
    std::string s = *v;
    s.erase(0, s.find_first_not_of(" \t"));
    s.erase(s.find_last_not_of(" \t") + 1);
    return s;
  }

  fs::path path(const std::string& key, const fs::path& base) const {
    auto v = text(key);
    if (!v || v->empty()) return {};
    fs::path p(*v);
    return p.is_absolute() ? p : base / p;
  }

  template <typename T>
  void number(const std::string& key, T& out) const {
    auto v = text(key);
    if (!v) return;
    std::istringstream in(*v);
    T parsed{};
    in >> parsed;
    if (!in || !in.eof() || (std::is_unsigned_v<T> && v->find('-') != std::string::npos))
      throw config_error(where(key) + ": '" + *v + "' is not a valid number");
    out = parsed;
  }

  void flag(const std::string& key, bool& out) const {
    auto v = text(key);
    if (!v) return;
    if (*v == "true" || *v == "1" || *v == "yes") out = true;
    else if (*v == "false" || *v == "0" || *v == "no") out = false;
    else throw config_error(where(key) + ": expected true or false, got '" + *v + "'");
  }

  std::string where(const std::string& key) const { return source_ + ": [" + name_ + "] " + key; }

 private:
  pt::ptree tree_;
  std::string name_;
  std::string source_;
};

void require_file(const fs::path& p, const std::string& what) {
  if (p.empty()) throw config_error(what + " is required for this model selection");
  if (!fs::is_regular_file(p)) throw config_error(what + " not found: " + p.string());
}

}  // namespace

ExperimentConfig load_experiment_config(const fs::path& path) {
  const std::string source = path.string();
  if (!fs::is_regular_file(path)) throw config_error("config file not found: " + source);
  pt::ptree root;
  try {
    pt::read_ini(path.string(), root);
  } catch (const pt::ini_parser_error& e) {
    throw config_error(std::string("cannot parse config: ") + e.what());
  }
  for (const auto& [section, body] : root) {
    auto known = kKnownKeys.find(section);
    if (known == kKnownKeys.end()) throw config_error(source + ": unknown section [" + section + "]");
    for (const auto& [key, value] : body)
      if (!known->second.count(key))
        throw config_error(source + ": unknown key '" + key + "' in [" + section + "]");
  }

  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  ExperimentConfig c;
  const Section data(root, "data", source), model(root, "model", source),
      train(root, "train", source), output(root, "output", source);

  c.corpus = data.path("corpus", base);
  c.glove = data.path("glove", base);
  c.vectors = data.path("vectors", base);
  c.ngrams = data.path("ngrams", base);
  c.brown = data.path("brown", base);
  data.flag("implicit_only", c.load.implicit_only);
  data.flag("lowercase", c.load.tokenizer.lowercase);

  try {
    if (auto v = model.text("kind")) c.model.kind = parse_model_kind(*v);
    else throw config_error(model.where("kind") + " is required");
    if (auto v = model.text("pooling")) c.model.pooling = parse_pooling(*v);
    if (auto v = train.text("loss")) c.train.loss = parse_loss_kind(*v);
  } catch (const invalid_argument_error& e) {
    throw config_error(source + ": " + e.what());
  }
  model.number("lstm_hidden", c.model.lstm_hidden);
  model.number("lstm_layers", c.model.lstm_layers);
  model.number("forget_bias", c.model.forget_bias);
  model.number("head_layers", c.model.head_layers);
  model.number("hidden_width_cap", c.model.hidden_width_cap);
  model.flag("strict_head_rule", c.model.strict_head_rule);
  model.flag("word_pairs", c.model.word_pairs);
  model.number("word_pair_dim", c.model.word_pair_dim);
  model.flag("freeze_encoder", c.model.freeze_encoder);
  c.encoder_checkpoint = model.path("encoder_checkpoint", base);
  if (auto v = model.text("hidden_widths"); v && !v->empty()) {
    for (auto part : text::split(*v, ',')) {
      std::string s(part);
      s.erase(0, s.find_first_not_of(' '));
      s.erase(s.find_last_not_of(' ') + 1);
      auto n = text::parse_uint(s);
      if (!n || *n == 0) throw config_error(model.where("hidden_widths") + ": bad width '" + s + "'");
      c.model.hidden_widths.push_back(static_cast<std::size_t>(*n));
    }
  }

  train.number("learning_rate", c.train.learning_rate);
  train.number("dropout", c.train.dropout);
  train.number("batch_size", c.train.batch_size);
  train.number("max_epochs", c.train.max_epochs);
  train.number("patience", c.train.patience);
  train.number("seed", c.train.seed);
  train.number("hinge_margin", c.train.hinge_margin);
  c.model.dropout = c.train.dropout;

  c.output_dir = output.path("dir", base);
  return c;
}

void ExperimentConfig::validate() const {
  require_file(corpus, "[data] corpus");
  if (output_dir.empty()) throw config_error("[output] dir is required");
  if (model.kind != ModelKind::pretrained) require_file(glove, "[data] glove");
  if (model.kind != ModelKind::bilstm) {
    if (vectors.empty() == ngrams.empty())
      throw config_error("exactly one of [data] vectors or [data] ngrams is required for a " +
                         std::string(to_string(model.kind)) + " model");
    require_file(vectors.empty() ? ngrams : vectors,
                 vectors.empty() ? "[data] ngrams" : "[data] vectors");
  }
  if (model.word_pairs) require_file(brown, "[data] brown");
  if (!encoder_checkpoint.empty()) require_file(encoder_checkpoint, "[model] encoder_checkpoint");
  try {
    train.validate();
    // Data-derived dimensions are unknown until the resources load; use
    // placeholders so the structural checks can run now.
    ModelConfig probe = model;
    if (probe.kind != ModelKind::bilstm && probe.pretrained_dim == 0) probe.pretrained_dim = 1;
    probe.validate();
  } catch (const invalid_argument_error& e) {
    throw config_error(e.what());
  }
}

ModelResources load_resources(ModelConfig& model, const fs::path& glove, const fs::path& vectors,
                              const fs::path& ngrams, const fs::path& brown) {
  ModelResources res;
  if (model.kind != ModelKind::pretrained) {
    res.embeddings = std::make_shared<const EmbeddingTable>(load_glove(glove));
    model.embedding_dim = res.embeddings->dimension;
  }
  if (model.kind != ModelKind::bilstm) {
    if (!vectors.empty())
      res.pretrained = std::make_shared<const StoreSource>(
          std::make_shared<const SentenceVectorStore>(load_vector_file(vectors)));
    else
      res.pretrained = std::make_shared<const Sent2VecSource>(
          std::make_shared<const NgramTable>(load_ngram_table(ngrams)));
    model.pretrained_dim = res.pretrained->dimension();
  }
  if (model.word_pairs)
    res.clusters = std::make_shared<const BrownClusterMap>(load_brown_clusters(brown));
  return res;
}

// ---------------------------------------------------------------- import

ImportFormat parse_import_format(const std::string& name) {
  if (name == "pdtb-pipes") return ImportFormat::pdtb_pipes;
  if (name == "conll-json") return ImportFormat::conll_json;
  if (name == "normalized") return ImportFormat::normalized;
  throw config_error("unknown import format '" + name +
                     "' (expected pdtb-pipes, conll-json or normalized)");
}

namespace {

std::string split_label(const RelationInstance& r) {
  if (r.split) return std::string(to_string(*r.split));
  try {
    const int section = wsj_section(r.doc_id);
    if (section >= 2 && section <= 20) return "train";
    if (section <= 1) return "dev";
    if (section == 21 || section == 22) return "test";
    return "excluded";
  } catch (const id_format_error&) {
    return "unassigned";
  }
}

}  // namespace

ImportResult run_import(ImportFormat format, const fs::path& input, const fs::path& out_dir,
                        std::optional<Split> split, std::ostream& log) {
  ImportResult result;
  switch (format) {
    case ImportFormat::pdtb_pipes:
      result.relations = import_pdtb_pipes(input, &result.stats);
      break;
    case ImportFormat::conll_json:
      result.relations = import_conll(input, split, &result.stats);
      break;
    case ImportFormat::normalized:
      result.relations = load_relations(input);
      result.stats.read = result.stats.kept = result.relations.size();
      break;
  }
  if (split && format != ImportFormat::conll_json)
    for (auto& r : result.relations) r.split = split;
  result.output = out_dir / "relations.jsonl";
  save_relations(result.relations, result.output);

  std::map<std::string, std::size_t> counts;
  for (const auto& r : result.relations) ++counts[split_label(r)];
  log << "imported " << result.relations.size() << " relations";
  if (result.stats.skipped_no_sense)
    log << " (" << result.stats.skipped_no_sense << " skipped without a second-level sense)";
  log << " -> " << result.output.string() << '\n';
  for (const auto& [name, n] : counts) log << "  " << name << ": " << n << '\n';
  return result;
}

// ---------------------------------------------------------------- train

namespace {

std::string absolute_or_empty(const fs::path& p) {
  return p.empty() ? std::string() : fs::absolute(p).lexically_normal().string();
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

}  // namespace

TrainRunResult run_training(const ExperimentConfig& config, std::optional<std::uint64_t> seed,
                            const fs::path& out_override, std::ostream& log) {
  config.validate();
  TrainConfig tc = config.train;
  if (seed) tc.seed = *seed;
  const fs::path out_dir = out_override.empty() ? config.output_dir : out_override;

  const auto relations = load_relations(config.corpus, config.load);
  const CorpusSplit split = assign_splits(relations);
  if (split.train.empty()) throw invalid_argument_error("corpus has no training instances");
  if (split.dev.empty()) throw invalid_argument_error("corpus has no dev instances");
  const SenseInventory senses = build_inventory(split.train);
  const auto pairs = expand_multilabel(split.train, senses);

  ModelConfig mc = config.model;
  mc.dropout = tc.dropout;
  auto resources = load_resources(mc, config.glove, config.vectors, config.ngrams, config.brown);
  RelationModel model(mc, resources, senses);
  Rng init_rng(mix_seed(tc.seed, 0));
  model.initialize(init_rng);

  if (!config.encoder_checkpoint.empty()) {
    if (!model.plan().use_bilstm)
      throw config_error("[model] encoder_checkpoint needs a model with a Bi-LSTM encoder");
    const auto donor = load_checkpoint(config.encoder_checkpoint);
    std::map<std::string, const Tensor<float>*> by_name;
    for (const auto& [name, t] : donor.tensors) by_name[name] = &t;
    for (auto& [name, t] : model.encoder().named_parameters()) {
      auto it = by_name.find(name);
      if (it == by_name.end() || it->second->shape() != t->shape())
        throw mismatch_error("encoder checkpoint lacks a compatible tensor " + name);
      std::copy(it->second->values().begin(), it->second->values().end(), t->values().begin());
    }
  }

  log << "training " << to_string(mc.kind) << " model: " << split.train.size() << " train ("
      << pairs.size() << " pairs), " << split.dev.size() << " dev, " << senses.size()
      << " senses, input " << model.plan().input_dimension() << ", head "
      << model.head().layer_count() << " layers\n";

  TrainRunResult result;
  result.history = train(model, split.train, pairs, split.dev, tc, [&](const EpochRecord& e) {
    log << "epoch " << e.epoch << " loss " << fixed(e.loss, 6) << " dev " << fixed(e.dev_accuracy)
        << '\n';
  });
  result.dev_report = evaluate(model, split.dev);

  std::map<std::string, std::string> meta{
      {"glove", absolute_or_empty(config.glove)},
      {"vectors", absolute_or_empty(config.vectors)},
      {"ngrams", absolute_or_empty(config.ngrams)},
      {"brown", absolute_or_empty(config.brown)},
      {"implicit_only", config.load.implicit_only ? "true" : "false"},
      {"lowercase", config.load.tokenizer.lowercase ? "true" : "false"},
      {"seed", std::to_string(tc.seed)},
  };
  for (auto it = meta.begin(); it != meta.end();) it = it->second.empty() ? meta.erase(it) : std::next(it);

  result.checkpoint = out_dir / "checkpoint.bin";
  save_checkpoint(make_checkpoint(model, std::move(meta)), result.checkpoint);
  write_history_csv(result.history, out_dir / "history.csv");
  write_report_json(result.dev_report, out_dir / "dev_report.json");
  write_report_tsv(result.dev_report, out_dir / "dev_report.tsv");
  log << "best epoch " << result.history.best_epoch << ", dev accuracy "
      << fixed(result.dev_report.accuracy) << "; wrote " << result.checkpoint.string() << '\n';
  return result;
}

// ---------------------------------------------------------------- eval

EvalRunResult run_eval(const fs::path& checkpoint_path, const fs::path& corpus, Split split,
                       bool baseline, const fs::path& out_dir, std::ostream& log) {
  if (checkpoint_path.empty() && !baseline)
    throw config_error("eval needs --checkpoint, --baseline, or both");
  std::optional<Checkpoint> ckpt;
  LoadOptions load;
  if (!checkpoint_path.empty()) {
    ckpt = load_checkpoint(checkpoint_path);
    auto flag = [&](const char* key, bool fallback) {
      auto it = ckpt->metadata.find(key);
      return it == ckpt->metadata.end() ? fallback : it->second == "true";
    };
    load.implicit_only = flag("implicit_only", false);
    load.tokenizer.lowercase = flag("lowercase", true);
  }
  const auto relations = load_relations(corpus, load);
  const CorpusSplit parts = assign_splits(relations);
  const auto& instances = parts.get(split);
  if (instances.empty())
    throw invalid_argument_error("split '" + std::string(to_string(split)) + "' is empty");

  EvalRunResult result;
  if (ckpt) {
    if (!parts.train.empty() && build_inventory(parts.train) != ckpt->senses)
      throw mismatch_error("sense inventory of the corpus training split differs from the checkpoint's");
    auto meta = [&](const char* key) {
      auto it = ckpt->metadata.find(key);
      return it == ckpt->metadata.end() ? fs::path() : fs::path(it->second);
    };
    ModelConfig mc = ckpt->config;
    const ModelConfig saved = mc;
    auto resources = load_resources(mc, meta("glove"), meta("vectors"), meta("ngrams"), meta("brown"));
    if (mc.embedding_dim != saved.embedding_dim || mc.pretrained_dim != saved.pretrained_dim)
      throw mismatch_error("resource dimensions changed since the checkpoint was written");
    RelationModel model(mc, resources, ckpt->senses);
    restore_parameters(model, *ckpt);
    result.model_report = evaluate(model, instances);
    write_report_json(*result.model_report, out_dir / "report.json");
    write_report_tsv(*result.model_report, out_dir / "report.tsv");
    log << "model accuracy on " << to_string(split) << ": " << fixed(result.model_report->accuracy)
        << " (" << result.model_report->correct << "/" << result.model_report->total << ")\n";
    if (result.model_report->never_predictable)
      log << "  " << result.model_report->never_predictable
          << " instances carry only senses outside the model's inventory\n";
  }
  if (baseline) {
    if (parts.train.empty())
      throw invalid_argument_error("baseline needs a training split in the corpus");
    const SenseInventory senses = build_inventory(parts.train);
    const auto mcc = most_common_class(expand_multilabel(parts.train, senses), senses);
    result.baseline_report = evaluate(mcc, instances, &senses);
    write_report_json(*result.baseline_report, out_dir / "baseline_report.json");
    write_report_tsv(*result.baseline_report, out_dir / "baseline_report.tsv");
    log << "most common class '" << mcc.label << "' accuracy on " << to_string(split) << ": "
        << fixed(result.baseline_report->accuracy) << '\n';
  }
  return result;
}

OverlapStats run_compare(const fs::path& report_a, const fs::path& report_b, const fs::path& out_dir,
                         std::ostream& log) {
  const auto stats = error_overlap(read_report_tsv(report_a), read_report_tsv(report_b));
  log << "errors A: " << stats.errors_a << ", errors B: " << stats.errors_b
      << ", shared: " << stats.intersection << ", union: " << stats.union_size
      << ", jaccard: " << fixed(stats.jaccard) << '\n';
  if (!out_dir.empty()) write_overlap_json(stats, out_dir / "overlap.json");
  return stats;
}

}  // namespace idr
