#include "idr/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "idr/errors.hpp"
#include "text_util.hpp"

namespace idr {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::dev: return "dev";
    case Split::test: return "test";
    case Split::blind: return "blind";
  }
  return "train";
}

std::optional<Split> parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "dev") return Split::dev;
  if (s == "test") return Split::test;
  if (s == "blind") return Split::blind;
  return std::nullopt;
}

RelationType RelationInstance::relation_type() const {
  if (type == "Implicit") return RelationType::implicit;
  if (type == "Explicit") return RelationType::explicit_;
  return RelationType::other;
}

// ---------------------------------------------------------------- tokenize

namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

bool is_ascii_punct(unsigned char c) {
  return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
         (c >= 0x7B && c <= 0x7E);
}

char32_t lower_code_point(char32_t c) {
  if (c < 0x80) return (c >= 'A' && c <= 'Z') ? c + 32 : c;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
  if (c >= 0x100 && c <= 0x17F) {
    if (c == 0x130) return U'i';
    if (c == 0x178) return 0xFF;
    if ((c <= 0x137 || (c >= 0x14A && c <= 0x177)) && c % 2 == 0) return c + 1;
    if (((c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E)) && c % 2 == 1) return c + 1;
    return c;
  }
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 32;
  if (c == 0x386) return 0x3AC;
  if (c >= 0x388 && c <= 0x38A) return c + 37;
  if (c == 0x38C) return 0x3CC;
  if (c == 0x38E || c == 0x38F) return c + 63;
  if (c >= 0x410 && c <= 0x42F) return c + 32;
  if (c >= 0x400 && c <= 0x40F) return c + 80;
  return c;
}

void append_utf8(std::string& out, char32_t c) {
  if (c < 0x80) {
    out += static_cast<char>(c);
  } else if (c < 0x800) {
    out += static_cast<char>(0xC0 | (c >> 6));
    out += static_cast<char>(0x80 | (c & 0x3F));
  } else if (c < 0x10000) {
    out += static_cast<char>(0xE0 | (c >> 12));
    out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (c & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (c >> 18));
    out += static_cast<char>(0x80 | ((c >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (c & 0x3F));
  }
}

// Malformed UTF-8 bytes are copied through untouched.
std::string lowercase_utf8(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len = b0 < 0x80 ? 1 : (b0 >> 5) == 0x6 ? 2 : (b0 >> 4) == 0xE ? 3
                                                       : (b0 >> 3) == 0x1E ? 4 : 0;
    bool ok = len > 0 && i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k)
      ok = (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
    if (!ok) {
      out += s[i++];
      continue;
    }
    char32_t c = len == 1 ? b0 : len == 2 ? (b0 & 0x1F) : len == 3 ? (b0 & 0x0F) : (b0 & 0x07);
    for (std::size_t k = 1; k < len; ++k) c = (c << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    append_utf8(out, lower_code_point(c));
    i += len;
  }
  return out;
}

}  // namespace

TokenSequence tokenize(std::string_view raw, const TokenizerOptions& options) {
  TokenSequence seq;
  std::size_t i = 0;
  while (i < raw.size()) {
    while (i < raw.size() && is_space(static_cast<unsigned char>(raw[i]))) ++i;
    std::size_t j = i;
    while (j < raw.size() && !is_space(static_cast<unsigned char>(raw[j]))) ++j;
    if (j == i) break;
    const std::string_view word = raw.substr(i, j - i);
    i = j;
    std::size_t lead = 0;
    while (lead < word.size() && is_ascii_punct(static_cast<unsigned char>(word[lead]))) ++lead;
    std::size_t trail = word.size();
    while (trail > lead && is_ascii_punct(static_cast<unsigned char>(word[trail - 1]))) --trail;
    for (std::size_t k = 0; k < lead; ++k) seq.tokens.emplace_back(1, word[k]);
    if (trail > lead) {
      const auto core = word.substr(lead, trail - lead);
      seq.tokens.push_back(options.lowercase ? lowercase_utf8(core) : std::string(core));
    }
    for (std::size_t k = std::max(trail, lead); k < word.size(); ++k)
      seq.tokens.emplace_back(1, word[k]);
  }
  if (seq.empty()) throw invalid_argument_error("tokenize: text is empty or whitespace only");
  return seq;
}

// ---------------------------------------------------------------- JSONL

namespace {

const std::string& require_string(const json& obj, const char* key, const std::string& source,
                                  std::size_t lineno) {
  auto it = obj.find(key);
  if (it == obj.end()) throw format_error(source, lineno, std::string("missing field \"") + key + "\"");
  if (!it->is_string())
    throw format_error(source, lineno, std::string("field \"") + key + "\" must be a string");
  return it->get_ref<const std::string&>();
}

RelationInstance parse_relation(const json& obj, const std::string& source, std::size_t lineno,
                                const TokenizerOptions& tok) {
  if (!obj.is_object()) throw format_error(source, lineno, "expected a JSON object");
  RelationInstance r;
  r.id = require_string(obj, "id", source, lineno);
  r.doc_id = require_string(obj, "doc_id", source, lineno);
  r.arg1_text = require_string(obj, "arg1", source, lineno);
  r.arg2_text = require_string(obj, "arg2", source, lineno);
  r.type = require_string(obj, "type", source, lineno);
  auto senses = obj.find("senses");
  if (senses == obj.end()) throw format_error(source, lineno, "missing field \"senses\"");
  if (!senses->is_array()) throw format_error(source, lineno, "field \"senses\" must be an array");
  for (const auto& s : *senses) {
    if (!s.is_string() || s.get_ref<const std::string&>().empty())
      throw format_error(source, lineno, "senses must be non-empty strings");
    const auto& label = s.get_ref<const std::string&>();
    if (std::find(r.senses.begin(), r.senses.end(), label) == r.senses.end())
      r.senses.push_back(label);
  }
  if (r.senses.empty() || r.senses.size() > 2)
    throw format_error(source, lineno,
                       "expected 1 or 2 senses, found " + std::to_string(r.senses.size()));
  if (auto sp = obj.find("split"); sp != obj.end()) {
    if (!sp->is_string()) throw format_error(source, lineno, "field \"split\" must be a string");
    r.split = parse_split(sp->get_ref<const std::string&>());
    if (!r.split)
      throw format_error(source, lineno, "unknown split \"" + sp->get<std::string>() + "\"");
  }
  try {
    r.arg1_tokens = tokenize(r.arg1_text, tok);
    r.arg2_tokens = tokenize(r.arg2_text, tok);
  } catch (const invalid_argument_error&) {
    throw format_error(source, lineno, "argument text is empty after tokenization");
  }
  return r;
}

}  // namespace

std::vector<RelationInstance> read_relations(std::istream& in, const std::string& source,
                                             const LoadOptions& options) {
  std::vector<RelationInstance> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto view = text::chomp(line);
    if (view.find_first_not_of(" \t") == std::string_view::npos) continue;
    json obj;
    try {
      obj = json::parse(view);
    } catch (const json::parse_error& e) {
      throw format_error(source, lineno, std::string("malformed JSON: ") + e.what());
    }
    auto r = parse_relation(obj, source, lineno, options.tokenizer);
    if (options.implicit_only && r.relation_type() != RelationType::implicit) continue;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RelationInstance> load_relations(const std::filesystem::path& path,
                                             const LoadOptions& options) {
  auto in = text::open_input(path);
  return read_relations(in, path.string(), options);
}

std::string relation_to_json_line(const RelationInstance& r) {
  ordered_json obj;
  obj["id"] = r.id;
  obj["doc_id"] = r.doc_id;
  obj["arg1"] = r.arg1_text;
  obj["arg2"] = r.arg2_text;
  obj["senses"] = r.senses;
  obj["type"] = r.type;
  if (r.split) obj["split"] = std::string(to_string(*r.split));
  return obj.dump();
}

void write_relations(const std::vector<RelationInstance>& relations, std::ostream& out) {
  for (const auto& r : relations) out << relation_to_json_line(r) << '\n';
}

void save_relations(const std::vector<RelationInstance>& relations,
                    const std::filesystem::path& path) {
  auto out = text::open_output(path);
  write_relations(relations, out);
}

// ---------------------------------------------------------------- senses

SenseInventory::SenseInventory(std::vector<std::string> labels) : labels_(std::move(labels)) {
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (!index_.emplace(labels_[i], i).second)
      throw invalid_argument_error("duplicate sense label '" + labels_[i] + "'");
}

std::optional<std::size_t> SenseInventory::find(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t SenseInventory::index_of(const std::string& label) const {
  auto idx = find(label);
  if (!idx) throw unknown_sense_error(label);
  return *idx;
}

SenseInventory build_inventory(const std::vector<RelationInstance>& instances) {
  if (instances.empty()) throw invalid_argument_error("build_inventory: no instances");
  std::set<std::string> labels;
  for (const auto& r : instances) labels.insert(r.senses.begin(), r.senses.end());
  return SenseInventory(std::vector<std::string>(labels.begin(), labels.end()));
}

std::vector<TrainingPair> expand_multilabel(const std::vector<RelationInstance>& train,
                                            const SenseInventory& inventory) {
  std::vector<TrainingPair> pairs;
  pairs.reserve(train.size() + train.size() / 16);
  for (std::size_t i = 0; i < train.size(); ++i)
    for (const auto& s : train[i].senses) pairs.push_back({i, inventory.index_of(s)});
  return pairs;
}

std::optional<std::string> second_level_sense(std::string_view sense) {
  const auto first = sense.find('.');
  if (first == std::string_view::npos || first == 0 || first + 1 >= sense.size())
    return std::nullopt;
  const auto second = sense.find('.', first + 1);
  return std::string(sense.substr(0, second));
}

// ---------------------------------------------------------------- splits

const std::vector<RelationInstance>& CorpusSplit::get(Split s) const {
  switch (s) {
    case Split::train: return train;
    case Split::dev: return dev;
    case Split::test: return test;
    case Split::blind: return blind;
  }
  return train;
}

int wsj_section(std::string_view doc_id) {
  const bool ok = doc_id.size() == 8 && doc_id.substr(0, 4) == "wsj_" &&
                  std::all_of(doc_id.begin() + 4, doc_id.end(),
                              [](char c) { return c >= '0' && c <= '9'; });
  if (!ok)
    throw id_format_error("doc id '" + std::string(doc_id) + "' does not match wsj_SSNN");
  return (doc_id[4] - '0') * 10 + (doc_id[5] - '0');
}

namespace {

std::optional<Split> section_split(int section) {
  if (section >= 2 && section <= 20) return Split::train;
  if (section <= 1) return Split::dev;
  if (section == 21 || section == 22) return Split::test;
  return std::nullopt;
}

void place(CorpusSplit& out, Split s, const RelationInstance& r) {
  switch (s) {
    case Split::train: out.train.push_back(r); break;
    case Split::dev: out.dev.push_back(r); break;
    case Split::test: out.test.push_back(r); break;
    case Split::blind: out.blind.push_back(r); break;
  }
}

}  // namespace

CorpusSplit split_by_sections(const std::vector<RelationInstance>& instances) {
  CorpusSplit out;
  for (const auto& r : instances) {
    if (auto s = section_split(wsj_section(r.doc_id)))
      place(out, *s, r);
    else
      ++out.excluded;
  }
  return out;
}

CorpusSplit assign_splits(const std::vector<RelationInstance>& instances) {
  CorpusSplit out;
  for (const auto& r : instances) {
    if (r.split) {
      place(out, *r.split, r);
    } else if (auto s = section_split(wsj_section(r.doc_id))) {
      place(out, *s, r);
    } else {
      ++out.excluded;
    }
  }
  return out;
}

}  // namespace idr
