#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "idr/corpus.hpp"
#include "idr/errors.hpp"
#include "text_util.hpp"

namespace idr {

using nlohmann::json;

namespace {

void add_sense(std::vector<std::string>& senses, std::string_view raw) {
  if (senses.size() == 2) return;
  auto s = second_level_sense(raw);
  if (s && std::find(senses.begin(), senses.end(), *s) == senses.end()) senses.push_back(*s);
}

const json* conll_arg_text(const json& obj, const char* arg) {
  if (auto it = obj.find(arg); it != obj.end() && it->is_object())
    if (auto t = it->find("RawText"); t != it->end() && t->is_string()) return &*t;
  if (auto it = obj.find(std::string(arg) + ".RawText"); it != obj.end() && it->is_string())
    return &*it;
  return nullptr;
}

}  // namespace

std::vector<RelationInstance> import_conll(const std::filesystem::path& path,
                                           std::optional<Split> split, ImportStats* stats,
                                           const TokenizerOptions& tok) {
  const std::string source = path.string();
  auto in = text::open_input(path);
  ImportStats local;
  ImportStats& st = stats ? *stats : local;
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
    ++st.read;
    const json* a1 = conll_arg_text(obj, "Arg1");
    const json* a2 = conll_arg_text(obj, "Arg2");
    auto doc = obj.find("DocID");
    auto id = obj.find("ID");
    auto sense = obj.find("Sense");
    auto type = obj.find("Type");
    if (!a1 || !a2) throw format_error(source, lineno, "missing Arg1/Arg2 RawText");
    if (doc == obj.end() || !doc->is_string()) throw format_error(source, lineno, "missing DocID");
    if (id == obj.end() || !(id->is_number_integer() || id->is_string()))
      throw format_error(source, lineno, "missing ID");
    if (sense == obj.end() || !sense->is_array()) throw format_error(source, lineno, "missing Sense");
    if (type == obj.end() || !type->is_string()) throw format_error(source, lineno, "missing Type");

    RelationInstance r;
    r.id = id->is_string() ? id->get<std::string>() : std::to_string(id->get<long long>());
    r.doc_id = doc->get<std::string>();
    r.arg1_text = a1->get<std::string>();
    r.arg2_text = a2->get<std::string>();
    r.type = type->get<std::string>();
    r.split = split;
    for (const auto& s : *sense)
      if (s.is_string()) add_sense(r.senses, s.get_ref<const std::string&>());
    if (r.senses.empty()) {
      ++st.skipped_no_sense;
      continue;
    }
    try {
      r.arg1_tokens = tokenize(r.arg1_text, tok);
      r.arg2_tokens = tokenize(r.arg2_text, tok);
    } catch (const invalid_argument_error&) {
      throw format_error(source, lineno, "argument text is empty after tokenization");
    }
    out.push_back(std::move(r));
    ++st.kept;
  }
  return out;
}

namespace {

// Zero-based columns of the PDTB 2.0 pipe format.
constexpr std::size_t kPipeColumns = 48;
constexpr std::size_t kColType = 0;
constexpr std::size_t kColSection = 1;
constexpr std::size_t kColFile = 2;
constexpr std::size_t kColSemClass[] = {11, 12, 13, 14};
constexpr std::size_t kColArg1Text = 24;
constexpr std::size_t kColArg2Text = 34;

std::string two_digits(std::string_view s) {
  std::string out(s);
  while (out.size() < 2) out.insert(out.begin(), '0');
  return out;
}

void import_pipe_file(const std::filesystem::path& path, std::vector<RelationInstance>& out,
                      ImportStats& st, const TokenizerOptions& tok) {
  const std::string source = path.string();
  auto in = text::open_input(path);
  std::string stem = path.stem().string();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto view = text::chomp(line);
    if (view.empty()) continue;
    auto cols = text::split(view, '|');
    if (cols.size() != kPipeColumns)
      throw format_error(source, lineno, "expected " + std::to_string(kPipeColumns) +
                                             " '|'-separated columns, found " +
                                             std::to_string(cols.size()));
    ++st.read;
    RelationInstance r;
    r.doc_id = stem;
    try {
      wsj_section(stem);
    } catch (const id_format_error&) {
      r.doc_id = "wsj_" + two_digits(cols[kColSection]) + two_digits(cols[kColFile]);
    }
    r.id = r.doc_id + ":" + std::to_string(lineno);
    r.type = std::string(cols[kColType]);
    r.arg1_text = std::string(cols[kColArg1Text]);
    r.arg2_text = std::string(cols[kColArg2Text]);
    for (auto c : kColSemClass) add_sense(r.senses, cols[c]);
    if (r.senses.empty()) {
      ++st.skipped_no_sense;
      continue;
    }
    try {
      r.arg1_tokens = tokenize(r.arg1_text, tok);
      r.arg2_tokens = tokenize(r.arg2_text, tok);
    } catch (const invalid_argument_error&) {
      throw format_error(source, lineno, "argument text is empty after tokenization");
    }
    out.push_back(std::move(r));
    ++st.kept;
  }
}

}  // namespace

std::vector<RelationInstance> import_pdtb_pipes(const std::filesystem::path& path,
                                                ImportStats* stats, const TokenizerOptions& tok) {
  ImportStats local;
  ImportStats& st = stats ? *stats : local;
  std::vector<RelationInstance> out;
  if (std::filesystem::is_directory(path)) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(path))
      if (e.is_regular_file() && e.path().extension() == ".pipe") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) import_pipe_file(f, out, st, tok);
  } else {
    import_pipe_file(path, out, st, tok);
  }
  return out;
}

}  // namespace idr
