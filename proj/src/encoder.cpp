#include "idr/encoder.hpp"

#include <algorithm>
#include <string>

#include "text_util.hpp"

namespace idr {

void EmbeddingTable::insert(std::string token, std::vector<float> vec) {
  if (vec.size() != dimension)
    throw shape_error("embedding for '" + token + "' has " + std::to_string(vec.size()) +
                      " values, table dimension is " + std::to_string(dimension));
  entries.try_emplace(std::move(token), std::move(vec));
}

const std::vector<float>& EmbeddingTable::lookup(const std::string& token) const {
  auto it = entries.find(token);
  return it == entries.end() ? oov_vector : it->second;
}

EmbeddingTable load_glove(const std::filesystem::path& path) {
  auto in = text::open_input(path);
  EmbeddingTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto view = text::chomp(line);
    if (view.empty()) continue;
    auto fields = text::split(view, ' ');
    if (fields.size() < 2)
      throw format_error(path.string(), lineno, "expected a token followed by its vector");
    if (table.dimension == 0) table = EmbeddingTable(fields.size() - 1);
    if (fields.size() - 1 != table.dimension)
      throw format_error(path.string(), lineno,
                         "expected " + std::to_string(table.dimension) + " values, found " +
                             std::to_string(fields.size() - 1));
    std::vector<float> vec(table.dimension);
    for (std::size_t i = 0; i < table.dimension; ++i) {
      auto v = text::parse_float(fields[i + 1]);
      if (!v) throw format_error(path.string(), lineno, "bad number '" + std::string(fields[i + 1]) + "'");
      vec[i] = *v;
    }
    table.insert(std::string(fields[0]), std::move(vec));
  }
  if (table.dimension == 0) throw format_error(path.string(), 0, "no embeddings found");
  return table;
}

void save_glove(const EmbeddingTable& table, const std::filesystem::path& path) {
  std::vector<const std::string*> keys;
  keys.reserve(table.entries.size());
  for (const auto& [k, v] : table.entries) keys.push_back(&k);
  std::sort(keys.begin(), keys.end(), [](auto* a, auto* b) { return *a < *b; });
  auto out = text::open_output(path);
  for (const auto* k : keys) {
    out << *k;
    for (float v : table.entries.at(*k)) out << ' ' << text::format_float(v);
    out << '\n';
  }
}

std::vector<std::vector<float>> embed_tokens(const TokenSequence& seq, const EmbeddingTable& table) {
  return embed_tokens_as<float>(seq, table);
}

std::string_view to_string(Pooling p) {
  switch (p) {
    case Pooling::concat: return "concat";
    case Pooling::max: return "max";
    case Pooling::mean: return "mean";
  }
  return "concat";
}

Pooling parse_pooling(std::string_view s) {
  if (s == "concat") return Pooling::concat;
  if (s == "max") return Pooling::max;
  if (s == "mean") return Pooling::mean;
  throw invalid_argument_error("unknown pooling mode '" + std::string(s) + "'");
}

SentenceRepresentation encode_concat(const TokenSequence& seq, const EmbeddingTable& table,
                                     const BiLstmEncoder<float>& encoder) {
  return {encoder.encode_with(embed_tokens(seq, table), Pooling::concat), Provenance::bilstm_concat};
}

SentenceRepresentation encode_pooled(const TokenSequence& seq, const EmbeddingTable& table,
                                     const BiLstmEncoder<float>& encoder, Pooling mode) {
  if (mode == Pooling::concat)
    throw invalid_argument_error("encode_pooled: mode must be max or mean");
  return {encoder.encode_with(embed_tokens(seq, table), mode),
          mode == Pooling::max ? Provenance::bilstm_max : Provenance::bilstm_mean};
}

}  // namespace idr
