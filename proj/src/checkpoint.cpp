#include "idr/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "text_util.hpp"

namespace idr {

using nlohmann::json;

namespace {

constexpr std::array<char, 8> kMagic = {'I', 'D', 'R', 'C', 'K', 'P', 'T', '\0'};

json config_to_json(const ModelConfig& c) {
  return json{{"kind", to_string(c.kind)},
              {"pooling", to_string(c.pooling)},
              {"embedding_dim", c.embedding_dim},
              {"lstm_hidden", c.lstm_hidden},
              {"lstm_layers", c.lstm_layers},
              {"forget_bias", c.forget_bias},
              {"pretrained_dim", c.pretrained_dim},
              {"word_pairs", c.word_pairs},
              {"word_pair_dim", c.word_pair_dim},
              {"head_layers", c.head_layers},
              {"hidden_width_cap", c.hidden_width_cap},
              {"hidden_widths", c.hidden_widths},
              {"strict_head_rule", c.strict_head_rule},
              {"dropout", c.dropout},
              {"freeze_encoder", c.freeze_encoder}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.kind = parse_model_kind(j.at("kind").get<std::string>());
  c.pooling = parse_pooling(j.at("pooling").get<std::string>());
  c.embedding_dim = j.at("embedding_dim").get<std::size_t>();
  c.lstm_hidden = j.at("lstm_hidden").get<std::size_t>();
  c.lstm_layers = j.at("lstm_layers").get<std::size_t>();
  c.forget_bias = j.at("forget_bias").get<float>();
  c.pretrained_dim = j.at("pretrained_dim").get<std::size_t>();
  c.word_pairs = j.at("word_pairs").get<bool>();
  c.word_pair_dim = j.at("word_pair_dim").get<std::size_t>();
  c.head_layers = j.at("head_layers").get<std::size_t>();
  c.hidden_width_cap = j.at("hidden_width_cap").get<std::size_t>();
  c.hidden_widths = j.at("hidden_widths").get<std::vector<std::size_t>>();
  c.strict_head_rule = j.at("strict_head_rule").get<bool>();
  c.dropout = j.at("dropout").get<float>();
  c.freeze_encoder = j.at("freeze_encoder").get<bool>();
  return c;
}

template <typename T>
void put_le(std::ostream& out, T v) {
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), sizeof buf);
}

template <typename T>
T get_le(std::istream& in, const std::string& source) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof buf))
    throw format_error(source, 0, "truncated checkpoint");
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

Checkpoint make_checkpoint(RelationModel& model, std::map<std::string, std::string> metadata) {
  Checkpoint c;
  c.config = model.config();
  c.senses = model.senses();
  c.metadata = std::move(metadata);
  for (auto& [name, t] : model.named_parameters())
    c.tensors.emplace_back(name, Tensor<float>(t->shape(), std::vector<float>(t->values().begin(),
                                                                              t->values().end())));
  return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  json header;
  header["config"] = config_to_json(ckpt.config);
  header["senses"] = ckpt.senses.labels();
  header["metadata"] = ckpt.metadata;
  json dir = json::array();
  for (const auto& [name, t] : ckpt.tensors) dir.push_back({{"name", name}, {"shape", t.shape()}});
  header["tensors"] = dir;
  const std::string text = header.dump();

  auto out = text::open_output(path);
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, ckpt.version);
  put_le<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, t] : ckpt.tensors)
    for (float v : t.values()) {
      std::uint32_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      put_le<std::uint32_t>(out, bits);
    }
  if (!out) throw error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string source = path.string();
  auto in = text::open_input(path);
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic)
    throw format_error(source, 0, "not a checkpoint (bad magic)");
  Checkpoint c;
  c.version = get_le<std::uint32_t>(in, source);
  if (c.version != kCheckpointVersion)
    throw format_error(source, 0, "unsupported checkpoint version " + std::to_string(c.version));
  const auto header_len = get_le<std::uint64_t>(in, source);
  std::string text(header_len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(header_len)))
    throw format_error(source, 0, "truncated checkpoint header");
  try {
    const json header = json::parse(text);
    c.config = config_from_json(header.at("config"));
    c.senses = SenseInventory(header.at("senses").get<std::vector<std::string>>());
    c.metadata = header.at("metadata").get<std::map<std::string, std::string>>();
    for (const auto& entry : header.at("tensors")) {
      auto shape = entry.at("shape").get<std::vector<std::size_t>>();
      Tensor<float> t(shape);
      for (auto& v : t.values()) {
        const auto bits = get_le<std::uint32_t>(in, source);
        std::memcpy(&v, &bits, sizeof v);
      }
      c.tensors.emplace_back(entry.at("name").get<std::string>(), std::move(t));
    }
  } catch (const json::exception& e) {
    throw format_error(source, 0, std::string("bad checkpoint header: ") + e.what());
  }
  if (in.peek() != std::char_traits<char>::eof())
    throw format_error(source, 0, "trailing bytes after tensor data");
  return c;
}

void restore_parameters(RelationModel& model, const Checkpoint& ckpt) {
  auto params = model.named_parameters();
  if (params.size() != ckpt.tensors.size())
    throw mismatch_error("checkpoint holds " + std::to_string(ckpt.tensors.size()) +
                         " tensors, model expects " + std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& [name, dst] = params[i];
    const auto& [src_name, src] = ckpt.tensors[i];
    if (name != src_name || dst->shape() != src.shape())
      throw mismatch_error("checkpoint tensor " + src_name + shape_string(src.shape()) +
                           " does not match model tensor " + name + shape_string(dst->shape()));
    std::copy(src.values().begin(), src.values().end(), dst->values().begin());
  }
}

}  // namespace idr
