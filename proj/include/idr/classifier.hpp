#pragma once

// Input assembly and the feedforward sense classifier.
//
// The per-instance input is always laid out as
//   [arg1 bilstm ; arg2 bilstm ; arg1 pretrained ; arg2 pretrained ; word pairs]
// with disabled blocks skipped.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "idr/corpus.hpp"
#include "idr/encoder.hpp"
#include "idr/errors.hpp"
#include "idr/kernel.hpp"
#include "idr/pretrained.hpp"
#include "idr/rng.hpp"
#include "idr/surface_features.hpp"
#include "idr/tensor.hpp"

namespace idr {

inline constexpr std::size_t kAllowedHeadLayers[] = {2, 3, 4, 5, 7, 10};

bool allowed_head_layer_count(std::size_t n);

template <typename Real>
struct FfnTrace {
  std::vector<std::vector<Real>> inputs;  // input of every affine layer
  std::vector<std::vector<Real>> pre;     // pre-activations of hidden layers
  std::vector<std::vector<Real>> masks;   // dropout masks of hidden layers
};

// (affine -> ReLU -> dropout) for each hidden layer, then a final affine that
// emits raw logits.
template <typename Real>
class FfnHead {
 public:
  struct Layer {
    Tensor<Real> weight;
    Tensor<Real> bias;
  };

  FfnHead() = default;
  FfnHead(std::size_t input_dim, const std::vector<std::size_t>& hidden_widths,
          std::size_t output_dim) {
    if (!allowed_head_layer_count(hidden_widths.size() + 1))
      throw invalid_argument_error("head layer count must be one of 2,3,4,5,7,10, got " +
                                   std::to_string(hidden_widths.size() + 1));
    if (input_dim == 0 || output_dim == 0)
      throw invalid_argument_error("head input and output widths must be positive");
    std::size_t in = input_dim;
    for (std::size_t w : hidden_widths) {
      if (w == 0) throw invalid_argument_error("hidden widths must be positive");
      layers_.push_back({Tensor<Real>({w, in}), Tensor<Real>({w})});
      in = w;
    }
    layers_.push_back({Tensor<Real>({output_dim, in}), Tensor<Real>({output_dim})});
  }

  void initialize(Rng& rng) {
    for (auto& l : layers_) {
      l.weight = xavier_init<Real>(static_cast<long>(l.weight.cols()),
                                   static_cast<long>(l.weight.rows()), rng);
      auto b = l.bias.values();
      std::fill(b.begin(), b.end(), Real(0));
    }
  }

  std::size_t layer_count() const { return layers_.size(); }
  std::size_t input_dim() const { return layers_.empty() ? 0 : layers_.front().weight.cols(); }
  std::size_t output_dim() const { return layers_.empty() ? 0 : layers_.back().weight.rows(); }
  std::vector<std::size_t> hidden_widths() const {
    std::vector<std::size_t> w;
    for (std::size_t i = 0; i + 1 < layers_.size(); ++i) w.push_back(layers_[i].weight.rows());
    return w;
  }
  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  std::vector<Real> forward(std::span<const Real> x, double dropout_rate, Rng* rng, bool training,
                            FfnTrace<Real>* trace = nullptr) const {
    if (training && dropout_rate > 0 && !rng)
      throw invalid_argument_error("head forward: training with dropout needs an Rng");
    if (trace) *trace = FfnTrace<Real>{};
    std::vector<Real> h(x.begin(), x.end());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      auto z = affine_forward<Real>(h, layers_[l].weight, layers_[l].bias);
      if (trace) trace->inputs.push_back(std::move(h));
      if (l + 1 == layers_.size()) return z;
      auto a = relu_forward<Real>(z);
      Rng dummy(0);
      auto d = dropout<Real>(a, dropout_rate, rng ? *rng : dummy, training);
      if (trace) {
        trace->pre.push_back(std::move(z));
        trace->masks.push_back(std::move(d.mask));
      }
      h = std::move(d.output);
    }
    return h;
  }

  // Accumulates parameter gradients and returns d(loss)/d(input).
  std::vector<Real> backward(const FfnTrace<Real>& trace, std::span<const Real> dlogits) {
    std::vector<Real> g(dlogits.begin(), dlogits.end());
    for (std::size_t l = layers_.size(); l-- > 0;) {
      if (l + 1 < layers_.size()) {
        g = dropout_backward<Real>(trace.masks[l], g);
        g = relu_backward<Real>(trace.pre[l], g);
      }
      g = affine_backward<Real>(trace.inputs[l], layers_[l].weight, layers_[l].bias, g);
    }
    return g;
  }

  std::vector<std::pair<std::string, Tensor<Real>*>> named_parameters() {
    std::vector<std::pair<std::string, Tensor<Real>*>> out;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      out.emplace_back("head." + std::to_string(l) + ".weight", &layers_[l].weight);
      out.emplace_back("head." + std::to_string(l) + ".bias", &layers_[l].bias);
    }
    return out;
  }

 private:
  std::vector<Layer> layers_;
};

struct InputPlan {
  bool use_bilstm = false;
  Pooling pooling = Pooling::concat;
  std::size_t bilstm_dim = 0;  // per argument, 2 x hidden
  bool use_pretrained = false;
  std::size_t pretrained_dim = 0;  // per argument
  bool use_wordpairs = false;
  std::size_t wordpair_dim = 0;

  std::size_t input_dimension() const {
    return (use_bilstm ? 2 * bilstm_dim : 0) + (use_pretrained ? 2 * pretrained_dim : 0) +
           (use_wordpairs ? wordpair_dim : 0);
  }
  void validate() const;
};

enum class ModelKind { bilstm, pretrained, combined };

std::string_view to_string(ModelKind k);
ModelKind parse_model_kind(std::string_view s);

// Head depth used in the reference setup: 3 layers over the end-to-end
// encoder, 4 over pretrained or combined inputs.
std::size_t default_head_layers(ModelKind kind);

struct ModelConfig {
  ModelKind kind = ModelKind::bilstm;
  Pooling pooling = Pooling::concat;
  std::size_t embedding_dim = 300;
  std::size_t lstm_hidden = 250;
  std::size_t lstm_layers = 2;
  float forget_bias = 1.0f;
  std::size_t pretrained_dim = 0;
  bool word_pairs = false;
  std::size_t word_pair_dim = kDefaultWordPairDimension;
  std::size_t head_layers = 0;  // 0: default_head_layers(kind)
  std::size_t hidden_width_cap = 512;
  std::vector<std::size_t> hidden_widths;  // explicit override; empty: derived
  bool strict_head_rule = true;             // head_layers must equal the default for kind
  float dropout = 0.35f;
  bool freeze_encoder = false;

  InputPlan plan() const;
  std::size_t resolved_head_layers() const;
  // Every hidden layer is min(input_dimension, hidden_width_cap) wide unless
  // hidden_widths is given.
  std::vector<std::size_t> resolved_hidden_widths() const;
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Supplies the pretrained block of one argument.
class PretrainedSource {
 public:
  virtual ~PretrainedSource() = default;
  virtual std::size_t dimension() const = 0;
  virtual std::vector<float> vector_for(const RelationInstance& r, ArgSlot slot) const = 0;
};

// Looks up "<relation_id>#argN" in a precomputed store.
class StoreSource final : public PretrainedSource {
 public:
  explicit StoreSource(std::shared_ptr<const SentenceVectorStore> store)
      : store_(std::move(store)) {}
  std::size_t dimension() const override { return store_->dimension(); }
  std::vector<float> vector_for(const RelationInstance& r, ArgSlot slot) const override {
    return store_->lookup(sentence_id(r.id, slot));
  }

 private:
  std::shared_ptr<const SentenceVectorStore> store_;
};

// Composes the argument vector from unigram/bigram embeddings.
class Sent2VecSource final : public PretrainedSource {
 public:
  explicit Sent2VecSource(std::shared_ptr<const NgramTable> table) : table_(std::move(table)) {}
  std::size_t dimension() const override { return table_->dimension(); }
  std::vector<float> vector_for(const RelationInstance& r, ArgSlot slot) const override {
    return sent2vec_compose(slot == ArgSlot::arg1 ? r.arg1_tokens : r.arg2_tokens, *table_).values;
  }

 private:
  std::shared_ptr<const NgramTable> table_;
};

struct ModelResources {
  std::shared_ptr<const EmbeddingTable> embeddings;
  std::shared_ptr<const PretrainedSource> pretrained;
  std::shared_ptr<const BrownClusterMap> clusters;
};

// First index of the largest value.
template <typename Real>
std::size_t argmax_lowest(std::span<const Real> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

template <typename Real>
class BasicRelationModel {
 public:
  struct Trace {
    std::array<EncoderTrace<Real>, 2> encoder;
    FfnTrace<Real> head;
  };

  BasicRelationModel(ModelConfig config, ModelResources resources, SenseInventory senses)
      : config_(std::move(config)), resources_(std::move(resources)), senses_(std::move(senses)) {
    config_.validate();
    plan_ = config_.plan();
    if (senses_.size() == 0) throw invalid_argument_error("model needs at least one sense");
    if (plan_.use_bilstm) {
      if (!resources_.embeddings)
        throw invalid_argument_error("bilstm input plan needs an embedding table");
      if (resources_.embeddings->dimension != config_.embedding_dim)
        throw shape_error("embedding table dimension " +
                          std::to_string(resources_.embeddings->dimension) +
                          " does not match configured " + std::to_string(config_.embedding_dim));
      encoder_ = BiLstmEncoder<Real>(config_.embedding_dim, config_.lstm_hidden,
                                     config_.lstm_layers, config_.pooling);
    }
    if (plan_.use_pretrained) {
      if (!resources_.pretrained)
        throw invalid_argument_error("pretrained input plan needs a vector source");
      if (resources_.pretrained->dimension() != plan_.pretrained_dim)
        throw shape_error("pretrained source dimension " +
                          std::to_string(resources_.pretrained->dimension()) +
                          " does not match configured " + std::to_string(plan_.pretrained_dim));
    }
    if (plan_.use_wordpairs && !resources_.clusters)
      throw invalid_argument_error("word-pair features need a Brown cluster map");
    head_ = FfnHead<Real>(plan_.input_dimension(), config_.resolved_hidden_widths(), senses_.size());
  }

  void initialize(Rng& rng) {
    if (plan_.use_bilstm) encoder_.initialize(rng, static_cast<Real>(config_.forget_bias));
    head_.initialize(rng);
  }

  const ModelConfig& config() const { return config_; }
  const InputPlan& plan() const { return plan_; }
  const SenseInventory& senses() const { return senses_; }
  const ModelResources& resources() const { return resources_; }
  BiLstmEncoder<Real>& encoder() { return encoder_; }
  const BiLstmEncoder<Real>& encoder() const { return encoder_; }
  FfnHead<Real>& head() { return head_; }
  const FfnHead<Real>& head() const { return head_; }
  double dropout_rate() const { return config_.dropout; }
  void set_dropout_rate(double rate) { config_.dropout = static_cast<float>(rate); }
  void set_freeze_encoder(bool freeze) { config_.freeze_encoder = freeze; }

  std::vector<Real> build_input(const RelationInstance& r, Trace* trace = nullptr) const {
    std::vector<Real> x;
    x.reserve(plan_.input_dimension());
    if (plan_.use_bilstm) {
      const TokenSequence* args[] = {&r.arg1_tokens, &r.arg2_tokens};
      for (int a = 0; a < 2; ++a) {
        auto rep = encoder_.encode(embed_tokens_as<Real>(*args[a], *resources_.embeddings),
                                   trace ? &trace->encoder[a] : nullptr);
        x.insert(x.end(), rep.begin(), rep.end());
      }
    }
    if (plan_.use_pretrained) {
      for (ArgSlot slot : {ArgSlot::arg1, ArgSlot::arg2}) {
        auto v = resources_.pretrained->vector_for(r, slot);
        if (v.size() != plan_.pretrained_dim)
          throw shape_error("pretrained vector for '" + r.id + "' has " + std::to_string(v.size()) +
                            " values, expected " + std::to_string(plan_.pretrained_dim));
        x.insert(x.end(), v.begin(), v.end());
      }
    }
    if (plan_.use_wordpairs) {
      const std::size_t offset = x.size();
      x.resize(offset + plan_.wordpair_dim, Real(0));
      auto feats =
          word_pair_features(r.arg1_tokens, r.arg2_tokens, *resources_.clusters, plan_.wordpair_dim);
      for (std::size_t idx : feats.active_indices) x[offset + idx] = Real(1);
    }
    if (x.size() != plan_.input_dimension())
      throw shape_error("assembled input has " + std::to_string(x.size()) + " values, plan says " +
                        std::to_string(plan_.input_dimension()));
    return x;
  }

  std::vector<Real> forward(const RelationInstance& r, bool training, Rng* rng,
                            Trace* trace = nullptr) const {
    const auto x = build_input(r, trace);
    return head_.forward(x, config_.dropout, rng, training, trace ? &trace->head : nullptr);
  }

  // Accumulates gradients of all parameters (the encoder's only when it is
  // trainable).
  void backward(const Trace& trace, std::span<const Real> dlogits) {
    const auto dx = head_.backward(trace.head, dlogits);
    if (!plan_.use_bilstm || config_.freeze_encoder) return;
    const std::size_t d = plan_.bilstm_dim;
    for (int a = 0; a < 2; ++a)
      encoder_.backward(trace.encoder[a], std::span<const Real>(dx).subspan(a * d, d));
  }

  std::size_t predict(const RelationInstance& r) const {
    const auto logits = forward(r, false, nullptr);
    return argmax_lowest<Real>(logits);
  }

  const std::string& predict_label(const RelationInstance& r) const {
    return senses_.label(predict(r));
  }

  // Parameters in checkpoint order: encoder (when present) then head.
  std::vector<std::pair<std::string, Tensor<Real>*>> named_parameters() {
    std::vector<std::pair<std::string, Tensor<Real>*>> out;
    if (plan_.use_bilstm)
      out = encoder_.named_parameters();
    for (auto& p : head_.named_parameters()) out.push_back(p);
    return out;
  }

  std::vector<Tensor<Real>*> trainable_parameters() {
    std::vector<Tensor<Real>*> out;
    if (plan_.use_bilstm && !config_.freeze_encoder)
      for (auto* t : encoder_.parameters()) out.push_back(t);
    for (auto& [name, t] : head_.named_parameters()) out.push_back(t);
    return out;
  }

  void zero_grad() {
    for (auto& [name, t] : named_parameters()) {
      t->enable_grad();
      t->zero_grad();
    }
  }

 private:
  ModelConfig config_;
  ModelResources resources_;
  SenseInventory senses_;
  InputPlan plan_;
  BiLstmEncoder<Real> encoder_;
  FfnHead<Real> head_;
};

using RelationModel = BasicRelationModel<float>;

}  // namespace idr
