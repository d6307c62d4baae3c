#include "idr/classifier.hpp"

#include <algorithm>

namespace idr {

bool allowed_head_layer_count(std::size_t n) {
  return std::find(std::begin(kAllowedHeadLayers), std::end(kAllowedHeadLayers), n) !=
         std::end(kAllowedHeadLayers);
}

void InputPlan::validate() const {
  if (!use_bilstm && !use_pretrained && !use_wordpairs)
    throw invalid_argument_error("input plan enables no source");
  if (use_bilstm && bilstm_dim == 0) throw invalid_argument_error("bilstm block has width 0");
  if (use_pretrained && pretrained_dim == 0)
    throw invalid_argument_error("pretrained block has width 0");
  if (use_wordpairs && wordpair_dim == 0)
    throw invalid_argument_error("word-pair block has width 0");
}

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::bilstm: return "bilstm";
    case ModelKind::pretrained: return "pretrained";
    case ModelKind::combined: return "combined";
  }
  return "bilstm";
}

ModelKind parse_model_kind(std::string_view s) {
  if (s == "bilstm") return ModelKind::bilstm;
  if (s == "pretrained") return ModelKind::pretrained;
  if (s == "combined") return ModelKind::combined;
  throw invalid_argument_error("unknown model kind '" + std::string(s) +
                               "' (expected bilstm, pretrained or combined)");
}

std::size_t default_head_layers(ModelKind kind) { return kind == ModelKind::bilstm ? 3 : 4; }

InputPlan ModelConfig::plan() const {
  InputPlan p;
  p.use_bilstm = kind != ModelKind::pretrained;
  p.pooling = pooling;
  p.bilstm_dim = p.use_bilstm ? 2 * lstm_hidden : 0;
  p.use_pretrained = kind != ModelKind::bilstm;
  p.pretrained_dim = p.use_pretrained ? pretrained_dim : 0;
  p.use_wordpairs = word_pairs;
  p.wordpair_dim = word_pairs ? word_pair_dim : 0;
  return p;
}

std::size_t ModelConfig::resolved_head_layers() const {
  if (!hidden_widths.empty()) return hidden_widths.size() + 1;
  return head_layers ? head_layers : default_head_layers(kind);
}

std::vector<std::size_t> ModelConfig::resolved_hidden_widths() const {
  if (!hidden_widths.empty()) return hidden_widths;
  const std::size_t width = std::min(plan().input_dimension(), hidden_width_cap);
  return std::vector<std::size_t>(resolved_head_layers() - 1, width);
}

void ModelConfig::validate() const {
  plan().validate();
  const std::size_t layers = resolved_head_layers();
  if (head_layers && !hidden_widths.empty() && head_layers != hidden_widths.size() + 1)
    throw invalid_argument_error("head_layers and hidden_widths disagree");
  if (!allowed_head_layer_count(layers))
    throw invalid_argument_error("head layer count must be one of 2,3,4,5,7,10, got " +
                                 std::to_string(layers));
  if (strict_head_rule && layers != default_head_layers(kind))
    throw invalid_argument_error("a " + std::string(to_string(kind)) + " model uses a " +
                                 std::to_string(default_head_layers(kind)) +
                                 "-layer head; got " + std::to_string(layers) +
                                 " (disable strict_head_rule for layer-count search)");
  if (hidden_width_cap == 0) throw invalid_argument_error("hidden_width_cap must be positive");
  if (kind != ModelKind::pretrained && (embedding_dim == 0 || lstm_hidden == 0 || lstm_layers == 0))
    throw invalid_argument_error("encoder dimensions must be positive");
  if (!(dropout >= 0.0f && dropout < 1.0f))
    throw invalid_argument_error("dropout must be in [0, 1)");
}

}  // namespace idr
