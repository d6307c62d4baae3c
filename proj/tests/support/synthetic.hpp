#pragma once

// Seeded synthetic corpora and resources for tests.

#include <unistd.h>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "idr/corpus.hpp"
#include "idr/encoder.hpp"
#include "idr/pretrained.hpp"
#include "idr/rng.hpp"

namespace idr::testing {

inline std::string vocab_word(std::size_t i) { return "w" + std::to_string(i); }

inline std::string sense_label(std::size_t s) {
  static const char* kSenses[] = {"Comparison.Contrast", "Contingency.Cause",
                                  "Expansion.Conjunction", "Expansion.Restatement",
                                  "Temporal.Asynchronous", "Expansion.Instantiation"};
  return kSenses[s % 6];
}

struct SyntheticSpec {
  std::size_t instances = 50;
  std::size_t senses = 4;
  std::size_t vocab = 100;
  std::size_t min_len = 3;
  std::size_t max_len = 6;
  std::uint64_t seed = 7;
  // Probability that an instance carries a second sense.
  double double_label_rate = 0.0;
};

// Each sense owns a contiguous slice of the vocabulary and both arguments draw
// their tokens from the gold sense's slice, so the corpus is separable.
inline std::vector<RelationInstance> make_corpus(const SyntheticSpec& spec,
                                                 const std::string& doc_prefix = "wsj_02") {
  Rng rng(spec.seed);
  const std::size_t slice = spec.vocab / spec.senses;
  std::vector<RelationInstance> out;
  for (std::size_t n = 0; n < spec.instances; ++n) {
    const std::size_t s = n % spec.senses;
    auto make_arg = [&] {
      const std::size_t len = spec.min_len + rng.below(spec.max_len - spec.min_len + 1);
      std::string text;
      for (std::size_t t = 0; t < len; ++t) {
        if (t) text += ' ';
        text += vocab_word(s * slice + rng.below(slice));
      }
      return text;
    };
    RelationInstance r;
    r.id = "syn" + std::to_string(n);
    const std::size_t file = n % 100;
    r.doc_id = doc_prefix + (file < 10 ? "0" : "") + std::to_string(file);
    r.arg1_text = make_arg();
    r.arg2_text = make_arg();
    r.arg1_tokens = tokenize(r.arg1_text);
    r.arg2_tokens = tokenize(r.arg2_text);
    r.senses = {sense_label(s)};
    if (spec.double_label_rate > 0 && rng.bernoulli(spec.double_label_rate))
      r.senses.push_back(sense_label((s + 1) % spec.senses));
    r.type = "Implicit";
    out.push_back(std::move(r));
  }
  return out;
}

inline EmbeddingTable make_embeddings(std::size_t vocab, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  EmbeddingTable table(dim);
  for (std::size_t i = 0; i < vocab; ++i) {
    std::vector<float> v(dim);
    for (auto& x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
    table.insert(vocab_word(i), std::move(v));
  }
  return table;
}

// Stand-in for an exported encoder: seeded random vectors keyed
// "<id>#arg1"/"<id>#arg2".
inline SentenceVectorStore make_fake_store(const std::vector<RelationInstance>& corpus,
                                           std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  SentenceVectorStore store(dim, "fake");
  for (const auto& r : corpus)
    for (ArgSlot slot : {ArgSlot::arg1, ArgSlot::arg2}) {
      std::vector<float> v(dim);
      for (auto& x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
      store.insert(sentence_id(r.id, slot), std::move(v));
    }
  return store;
}

// Fresh, empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  auto dir = std::filesystem::temp_directory_path() /
             ("idr_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace idr::testing
