#pragma once

// Word-pair Brown-cluster indicator features, hashed into a fixed dimension.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "idr/tokens.hpp"

namespace idr {

inline constexpr std::size_t kDefaultWordPairDimension = std::size_t{1} << 15;

class BrownClusterMap {
 public:
  static constexpr std::string_view unknown_cluster = "UNK";

  // Throws invalid_argument_error unless `cluster` is a non-empty {0,1} string or "UNK".
  void insert(std::string token, std::string cluster);
  const std::string& cluster_of(const std::string& token) const;
  std::size_t size() const { return clusters_.size(); }
  const std::unordered_map<std::string, std::string>& entries() const { return clusters_; }

  friend bool operator==(const BrownClusterMap&, const BrownClusterMap&) = default;

 private:
  std::unordered_map<std::string, std::string> clusters_;
};

// Lines "<bitstring>\t<token>[\t<frequency>]"; the frequency is ignored.
BrownClusterMap load_brown_clusters(const std::filesystem::path& path);
// Writes "<bitstring>\t<token>" lines sorted by token.
void save_brown_clusters(const BrownClusterMap& clusters, const std::filesystem::path& path);

// 64-bit FNV-1a over the key's bytes (offset basis 0xcbf29ce484222325,
// prime 0x100000001b3). Fixed across platforms and processes.
std::uint64_t hash64(std::string_view key);

struct SparseFeatureVector {
  std::size_t dimension = 0;
  std::vector<std::size_t> active_indices;  // sorted, unique

  friend bool operator==(const SparseFeatureVector&, const SparseFeatureVector&) = default;
};

// Activates hash64(c(t1) + "|" + c(t2)) mod dimension for every t1 in arg1,
// t2 in arg2. Binary presence: repeats collapse.
SparseFeatureVector word_pair_features(const TokenSequence& arg1, const TokenSequence& arg2,
                                       const BrownClusterMap& clusters, std::size_t dimension);

}  // namespace idr
