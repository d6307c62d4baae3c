#include "idr/surface_features.hpp"

#include <algorithm>
#include <set>

#include "idr/errors.hpp"
#include "text_util.hpp"

namespace idr {

namespace {

bool valid_cluster(std::string_view c) {
  if (c == BrownClusterMap::unknown_cluster) return true;
  return !c.empty() && c.find_first_not_of("01") == std::string_view::npos;
}

}  // namespace

void BrownClusterMap::insert(std::string token, std::string cluster) {
  if (!valid_cluster(cluster))
    throw invalid_argument_error("invalid cluster id '" + cluster + "' for token '" + token + "'");
  clusters_.insert_or_assign(std::move(token), std::move(cluster));
}

const std::string& BrownClusterMap::cluster_of(const std::string& token) const {
  static const std::string unk(unknown_cluster);
  auto it = clusters_.find(token);
  return it == clusters_.end() ? unk : it->second;
}

BrownClusterMap load_brown_clusters(const std::filesystem::path& path) {
  const std::string source = path.string();
  auto in = text::open_input(path);
  BrownClusterMap map;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto view = text::chomp(line);
    if (view.empty()) continue;
    auto fields = text::split(view, '\t');
    if (fields.size() < 2 || fields.size() > 3)
      throw format_error(source, lineno, "expected '<bitstring>\\t<token>[\\t<frequency>]'");
    if (!valid_cluster(fields[0]))
      throw format_error(source, lineno, "invalid cluster id '" + std::string(fields[0]) + "'");
    if (fields[1].empty()) throw format_error(source, lineno, "empty token");
    const std::string token(fields[1]);
    if (map.entries().count(token))
      throw format_error(source, lineno, "duplicate token '" + token + "'");
    map.insert(token, std::string(fields[0]));
  }
  return map;
}

void save_brown_clusters(const BrownClusterMap& clusters, const std::filesystem::path& path) {
  std::vector<std::pair<std::string, std::string>> rows(clusters.entries().begin(),
                                                        clusters.entries().end());
  std::sort(rows.begin(), rows.end());
  auto out = text::open_output(path);
  for (const auto& [token, cluster] : rows) out << cluster << '\t' << token << '\n';
}

std::uint64_t hash64(std::string_view key) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : key) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

SparseFeatureVector word_pair_features(const TokenSequence& arg1, const TokenSequence& arg2,
                                       const BrownClusterMap& clusters, std::size_t dimension) {
  if (dimension == 0) throw invalid_argument_error("word_pair_features: dimension must be >= 1");
  std::set<std::string> left, right;
  for (const auto& t : arg1) left.insert(clusters.cluster_of(t));
  for (const auto& t : arg2) right.insert(clusters.cluster_of(t));
  std::set<std::size_t> active;
  std::string key;
  for (const auto& a : left)
    for (const auto& b : right) {
      key.assign(a);
      key += '|';
      key += b;
      active.insert(static_cast<std::size_t>(hash64(key) % dimension));
    }
  return {dimension, std::vector<std::size_t>(active.begin(), active.end())};
}

}  // namespace idr
