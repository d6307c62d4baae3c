#include "idr/train_eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "text_util.hpp"

namespace idr {

std::string_view to_string(LossKind k) { return k == LossKind::nll ? "nll" : "hinge"; }

LossKind parse_loss_kind(std::string_view s) {
  if (s == "nll") return LossKind::nll;
  if (s == "hinge") return LossKind::hinge;
  throw invalid_argument_error("unknown loss '" + std::string(s) + "' (expected nll or hinge)");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0f)) throw invalid_argument_error("learning_rate must be > 0");
  if (!(dropout >= 0.0f && dropout < 1.0f)) throw invalid_argument_error("dropout must be in [0, 1)");
  if (batch_size < 1) throw invalid_argument_error("batch_size must be >= 1");
  if (patience < 1) throw invalid_argument_error("patience must be >= 1");
  if (loss == LossKind::hinge && !(hinge_margin > 0.0f))
    throw invalid_argument_error("hinge_margin must be > 0");
}

TrainHistory train(RelationModel& model, const std::vector<RelationInstance>& train_instances,
                   const std::vector<TrainingPair>& pairs,
                   const std::vector<RelationInstance>& dev, const TrainConfig& config,
                   const EpochCallback& on_epoch) {
  config.validate();
  if (train_instances.empty() || pairs.empty())
    throw invalid_argument_error("train: empty training set");
  if (dev.empty()) throw invalid_argument_error("train: empty dev set");
  for (const auto& p : pairs)
    if (p.instance >= train_instances.size() || p.sense >= model.senses().size())
      throw invalid_argument_error("train: training pair out of range");

  TrainHistory history;
  if (config.max_epochs == 0) return history;

  model.set_dropout_rate(config.dropout);
  Rng rng(mix_seed(config.seed, 1));
  auto params = model.trainable_parameters();
  std::vector<AdamState<float>> adam;
  adam.reserve(params.size());
  for (auto* p : params) adam.emplace_back(p->size(), config.learning_rate);

  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  RelationModel best = model;
  double best_accuracy = -1.0;
  std::size_t since_best = 0;
  RelationModel::Trace trace;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double total_loss = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const float scale = 1.0f / static_cast<float>(end - start);
      model.zero_grad();
      for (std::size_t k = start; k < end; ++k) {
        const auto& pair = pairs[order[k]];
        const auto logits = model.forward(train_instances[pair.instance], true, &rng, &trace);
        auto loss = config.loss == LossKind::nll
                        ? softmax_nll<float>(logits, pair.sense)
                        : multiclass_hinge<float>(logits, pair.sense, config.hinge_margin);
        if (!std::isfinite(loss.loss))
          throw divergence_error(epoch, "non-finite loss on instance '" +
                                            train_instances[pair.instance].id + "'");
        total_loss += loss.loss;
        for (auto& g : loss.grad) g *= scale;
        model.backward(trace, loss.grad);
      }
      for (std::size_t i = 0; i < params.size(); ++i) adam_step(*params[i], adam[i]);
    }
    const double mean_loss = total_loss / static_cast<double>(pairs.size());
    if (!std::isfinite(mean_loss)) throw divergence_error(epoch, "non-finite mean loss");

    EpochRecord rec{epoch, mean_loss, evaluate(model, dev).accuracy};
    history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (rec.dev_accuracy > best_accuracy) {
      best_accuracy = rec.dev_accuracy;
      best = model;
      history.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  model = std::move(best);
  for (auto& [name, t] : model.named_parameters()) t->drop_grad();
  return history;
}

// ---------------------------------------------------------------- evaluation

namespace {

void tally(EvalReport& report) {
  report.correct = 0;
  report.per_sense.clear();
  for (const auto& r : report.records) {
    for (const auto& g : r.gold) ++report.per_sense[g].gold;
    auto& p = report.per_sense[r.predicted];
    ++p.predicted;
    if (r.correct) {
      ++p.correct;
      ++report.correct;
    }
  }
  report.total = report.records.size();
  report.accuracy =
      report.total ? static_cast<double>(report.correct) / static_cast<double>(report.total) : 0.0;
}

}  // namespace

EvalReport evaluate_predictions(const std::vector<RelationInstance>& instances,
                                const std::vector<std::string>& predicted,
                                const SenseInventory* inventory) {
  if (instances.empty()) throw invalid_argument_error("evaluate: empty test set");
  if (instances.size() != predicted.size())
    throw invalid_argument_error("evaluate: " + std::to_string(instances.size()) +
                                 " instances but " + std::to_string(predicted.size()) +
                                 " predictions");
  EvalReport report;
  report.records.reserve(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    EvalRecord rec{inst.id, inst.senses, predicted[i], false};
    rec.correct = std::find(inst.senses.begin(), inst.senses.end(), predicted[i]) != inst.senses.end();
    if (inventory && std::none_of(inst.senses.begin(), inst.senses.end(),
                                  [&](const std::string& s) { return inventory->find(s).has_value(); }))
      ++report.never_predictable;
    report.records.push_back(std::move(rec));
  }
  tally(report);
  return report;
}

EvalReport evaluate(const RelationModel& model, const std::vector<RelationInstance>& instances) {
  if (instances.empty()) throw invalid_argument_error("evaluate: empty test set");
  std::vector<std::string> predicted;
  predicted.reserve(instances.size());
  for (const auto& inst : instances) predicted.push_back(model.predict_label(inst));
  return evaluate_predictions(instances, predicted, &model.senses());
}

MostCommonClass most_common_class(const std::vector<TrainingPair>& pairs,
                                  const SenseInventory& inventory) {
  if (pairs.empty()) throw invalid_argument_error("most_common_class: empty training set");
  std::vector<std::size_t> counts(inventory.size(), 0);
  for (const auto& p : pairs) ++counts.at(p.sense);
  const auto best = static_cast<std::size_t>(
      std::max_element(counts.begin(), counts.end()) - counts.begin());
  return {best, inventory.label(best)};
}

EvalReport evaluate(const MostCommonClass& baseline, const std::vector<RelationInstance>& instances,
                    const SenseInventory* inventory) {
  std::vector<std::string> predicted(instances.size(), baseline.label);
  return evaluate_predictions(instances, predicted, inventory);
}

OverlapStats error_overlap(const EvalReport& a, const EvalReport& b) {
  std::unordered_map<std::string, bool> correct_b;
  for (const auto& r : b.records) correct_b.emplace(r.id, r.correct);
  std::set<std::string> ids_a;
  for (const auto& r : a.records) ids_a.insert(r.id);
  if (ids_a.size() != a.records.size() || correct_b.size() != b.records.size() ||
      ids_a.size() != correct_b.size() ||
      std::any_of(ids_a.begin(), ids_a.end(), [&](const std::string& id) { return !correct_b.count(id); }))
    throw invalid_argument_error("error_overlap: reports cover different instance sets");

  OverlapStats s;
  for (const auto& r : a.records) {
    const bool err_a = !r.correct, err_b = !correct_b.at(r.id);
    s.errors_a += err_a;
    s.errors_b += err_b;
    if (err_a && err_b) s.shared_ids.push_back(r.id);
    if (err_a || err_b) ++s.union_size;
  }
  std::sort(s.shared_ids.begin(), s.shared_ids.end());
  s.intersection = s.shared_ids.size();
  s.jaccard = s.union_size == 0 ? 1.0
                                : static_cast<double>(s.intersection) / static_cast<double>(s.union_size);
  return s;
}

// ---------------------------------------------------------------- files

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

void write_report_json(const EvalReport& report, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["accuracy"] = report.accuracy;
  j["correct"] = report.correct;
  j["total"] = report.total;
  j["never_predictable"] = report.never_predictable;
  auto& senses = j["per_sense"] = nlohmann::ordered_json::object();
  for (const auto& [label, c] : report.per_sense)
    senses[label] = {{"gold", c.gold}, {"predicted", c.predicted}, {"correct", c.correct}};
  auto out = text::open_output(path);
  out << j.dump(2) << '\n';
}

void write_report_tsv(const EvalReport& report, const std::filesystem::path& path) {
  auto out = text::open_output(path);
  out << "id\tgold\tpredicted\tcorrect\n";
  for (const auto& r : report.records)
    out << r.id << '\t' << join(r.gold, '|') << '\t' << r.predicted << '\t' << (r.correct ? 1 : 0)
        << '\n';
}

EvalReport read_report_tsv(const std::filesystem::path& path) {
  const std::string source = path.string();
  auto in = text::open_input(path);
  std::string line;
  if (!std::getline(in, line) || text::chomp(line) != "id\tgold\tpredicted\tcorrect")
    throw format_error(source, 1, "expected header 'id\\tgold\\tpredicted\\tcorrect'");
  EvalReport report;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto view = text::chomp(line);
    if (view.empty()) continue;
    auto f = text::split(view, '\t');
    if (f.size() != 4 || (f[3] != "0" && f[3] != "1"))
      throw format_error(source, lineno, "expected 4 tab-separated fields ending in 0 or 1");
    EvalRecord r;
    r.id = std::string(f[0]);
    for (auto g : text::split(f[1], '|')) r.gold.emplace_back(g);
    r.predicted = std::string(f[2]);
    r.correct = f[3] == "1";
    report.records.push_back(std::move(r));
  }
  tally(report);
  return report;
}

void write_history_csv(const TrainHistory& history, const std::filesystem::path& path) {
  auto out = text::open_output(path);
  out << "epoch,loss,dev_accuracy\n";
  for (const auto& e : history.epochs)
    out << e.epoch << ',' << format_double(e.loss) << ',' << format_double(e.dev_accuracy) << '\n';
}

void write_overlap_json(const OverlapStats& s, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["errors_a"] = s.errors_a;
  j["errors_b"] = s.errors_b;
  j["intersection"] = s.intersection;
  j["union"] = s.union_size;
  j["jaccard"] = s.jaccard;
  j["shared_ids"] = s.shared_ids;
  auto out = text::open_output(path);
  out << j.dump(2) << '\n';
}

}  // namespace idr
