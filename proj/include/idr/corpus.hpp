#pragma once

// Relation-annotated corpora: the normalized JSONL interchange format,
// tokenization, sense inventories, section-based splits and multi-label
// expansion. Importers for PDTB pipe files and CoNLL shared-task JSON map
// into the same RelationInstance model.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "idr/tokens.hpp"

namespace idr {

enum class RelationType { implicit, explicit_, other };
enum class Split { train, dev, test, blind };

std::string_view to_string(Split s);
std::optional<Split> parse_split(std::string_view s);

struct RelationInstance {
  std::string id;
  std::string doc_id;
  std::string arg1_text;
  std::string arg2_text;
  TokenSequence arg1_tokens;
  TokenSequence arg2_tokens;
  std::vector<std::string> senses;  // 1 or 2, distinct
  std::string type;                 // as written in the file, e.g. "Implicit", "EntRel"
  std::optional<Split> split;

  RelationType relation_type() const;

  friend bool operator==(const RelationInstance&, const RelationInstance&) = default;
};

struct TokenizerOptions {
  bool lowercase = true;
};

// Whitespace split, then each leading/trailing ASCII punctuation character
// becomes its own token. Lowercasing covers ASCII, Latin-1, Latin Extended-A,
// Greek and Cyrillic. Throws invalid_argument_error on blank text.
TokenSequence tokenize(std::string_view raw, const TokenizerOptions& options = {});

struct LoadOptions {
  bool implicit_only = false;
  TokenizerOptions tokenizer;
};

// Strict JSONL reader. Repeated senses on one line are collapsed.
std::vector<RelationInstance> load_relations(const std::filesystem::path& path,
                                             const LoadOptions& options = {});
std::vector<RelationInstance> read_relations(std::istream& in, const std::string& source,
                                             const LoadOptions& options = {});

// One object per line with keys in the order id, doc_id, arg1, arg2, senses,
// type[, split].
std::string relation_to_json_line(const RelationInstance& r);
void save_relations(const std::vector<RelationInstance>& relations,
                    const std::filesystem::path& path);
void write_relations(const std::vector<RelationInstance>& relations, std::ostream& out);

class SenseInventory {
 public:
  SenseInventory() = default;
  // Labels must be unique; their order defines the indices.
  explicit SenseInventory(std::vector<std::string> labels);

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(std::size_t index) const { return labels_.at(index); }
  std::optional<std::size_t> find(const std::string& label) const;
  // Throws unknown_sense_error.
  std::size_t index_of(const std::string& label) const;

  friend bool operator==(const SenseInventory& a, const SenseInventory& b) {
    return a.labels_ == b.labels_;
  }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Distinct labels of the given (training) instances, sorted lexicographically.
SenseInventory build_inventory(const std::vector<RelationInstance>& instances);

struct CorpusSplit {
  std::vector<RelationInstance> train, dev, test, blind;
  std::size_t excluded = 0;

  const std::vector<RelationInstance>& get(Split s) const;
};

// Two-digit section number of a "wsj_SSNN" document id; throws id_format_error.
int wsj_section(std::string_view doc_id);

// Sections 02-20 train, 00-01 dev, 21-22 test; anything else is excluded and
// counted. Every doc id must match wsj_SSNN.
CorpusSplit split_by_sections(const std::vector<RelationInstance>& instances);

// An explicit split field wins; otherwise wsj ids are split by section. A
// non-wsj id without a split field is an id_format_error.
CorpusSplit assign_splits(const std::vector<RelationInstance>& instances);

struct TrainingPair {
  std::size_t instance;  // index into the training instance list
  std::size_t sense;     // index into the inventory
  friend bool operator==(const TrainingPair&, const TrainingPair&) = default;
};

// One pair per (instance, sense), in input order.
std::vector<TrainingPair> expand_multilabel(const std::vector<RelationInstance>& train,
                                            const SenseInventory& inventory);

// "Contingency.Cause.Reason" -> "Contingency.Cause"; labels with fewer than
// two levels yield nullopt.
std::optional<std::string> second_level_sense(std::string_view sense);

struct ImportStats {
  std::size_t read = 0;
  std::size_t kept = 0;
  std::size_t skipped_no_sense = 0;
};

// CoNLL-2015/2016 relations.json (one object per line, nested Arg1/Arg2
// RawText, DocID, ID, Sense list, Type). Senses are cut to the second level;
// `split` is stamped on every instance when given.
std::vector<RelationInstance> import_conll(const std::filesystem::path& path,
                                           std::optional<Split> split, ImportStats* stats = nullptr,
                                           const TokenizerOptions& tok = {});

// PDTB 2.0 pipe-delimited files (48 columns); `path` may be a single file or a
// directory searched recursively for *.pipe files in sorted order.
std::vector<RelationInstance> import_pdtb_pipes(const std::filesystem::path& path,
                                                ImportStats* stats = nullptr,
                                                const TokenizerOptions& tok = {});

}  // namespace idr
