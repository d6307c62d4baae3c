#pragma once

// Precomputed sentence vectors and Sent2Vec-style n-gram composition.
//
// Vector file:   "<count> <dim>\n" then count lines "<id> <f1> ... <fdim>".
// N-gram table:  "<unigrams> <bigrams> <dim>\n" then the unigram lines followed
//                by the bigram lines; a bigram id is "<left>_<right>".

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "idr/encoder.hpp"
#include "idr/tokens.hpp"

namespace idr {

enum class ArgSlot { arg1, arg2 };

// "<relation_id>#arg1" / "<relation_id>#arg2".
std::string sentence_id(std::string_view relation_id, ArgSlot slot);

// Immutable-after-load id -> vector map that remembers insertion order so that
// saving is deterministic.
class SentenceVectorStore {
 public:
  SentenceVectorStore() = default;
  explicit SentenceVectorStore(std::size_t dimension, std::string source_name = {})
      : dimension_(dimension), source_name_(std::move(source_name)) {}

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return ids_.size(); }
  const std::string& source_name() const { return source_name_; }
  const std::vector<std::string>& ids() const { return ids_; }

  // Throws invalid_argument_error on a duplicate id, shape_error on a length mismatch.
  void insert(std::string id, std::vector<float> vec);
  bool contains(const std::string& id) const { return vectors_.count(id) != 0; }
  // Throws missing_id_error; there is no silent default.
  const std::vector<float>& lookup(const std::string& id) const;

  friend bool operator==(const SentenceVectorStore& a, const SentenceVectorStore& b) {
    return a.dimension_ == b.dimension_ && a.ids_ == b.ids_ && a.vectors_ == b.vectors_;
  }

 private:
  std::size_t dimension_ = 0;
  std::string source_name_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::vector<float>> vectors_;
};

// Strict parse; source_name defaults to the file stem.
SentenceVectorStore load_vector_file(const std::filesystem::path& path);
void save_vector_file(const SentenceVectorStore& store, const std::filesystem::path& path);

class NgramTable {
 public:
  NgramTable() = default;
  explicit NgramTable(std::size_t dimension) : dimension_(dimension) {}

  static std::string bigram_key(std::string_view left, std::string_view right);

  std::size_t dimension() const { return dimension_; }
  const SentenceVectorStore& unigrams() const { return unigrams_; }
  const SentenceVectorStore& bigrams() const { return bigrams_; }

  void add_unigram(std::string token, std::vector<float> vec);
  void add_bigram(std::string_view left, std::string_view right, std::vector<float> vec);
  void add_bigram_key(std::string key, std::vector<float> vec);

  const std::vector<float>* unigram(const std::string& token) const;
  const std::vector<float>* bigram(std::string_view left, std::string_view right) const;

  friend bool operator==(const NgramTable& a, const NgramTable& b) {
    return a.dimension_ == b.dimension_ && a.unigrams_ == b.unigrams_ && a.bigrams_ == b.bigrams_;
  }

 private:
  std::size_t dimension_ = 0;
  SentenceVectorStore unigrams_{dimension_};
  SentenceVectorStore bigrams_{dimension_};
};

NgramTable load_ngram_table(const std::filesystem::path& path);
void save_ngram_table(const NgramTable& table, const std::filesystem::path& path);

// Mean of the vectors of every in-table unigram and adjacent-pair bigram.
// Absent n-grams neither contribute nor count towards the divisor.
SentenceRepresentation sent2vec_compose(const TokenSequence& seq, const NgramTable& table);

}  // namespace idr
