#include <doctest.h>

#include <fstream>

#include "idr/surface_features.hpp"
#include "support/synthetic.hpp"

using namespace idr;

namespace {

TokenSequence seq(std::initializer_list<const char*> toks) {
  TokenSequence s;
  for (const char* t : toks) s.tokens.emplace_back(t);
  return s;
}

BrownClusterMap ab_clusters() {
  BrownClusterMap m;
  m.insert("a", "01");
  m.insert("b", "10");
  return m;
}

}  // namespace

TEST_SUITE("surface_features") {

TEST_CASE("hash64 is 64-bit FNV-1a") {
  CHECK(hash64("") == 0xcbf29ce484222325ULL);
  CHECK(hash64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(hash64("01|10") == 10141343992818482859ULL);
}

TEST_CASE("single pair activates the hashed index") {
  auto m = ab_clusters();
  auto f = word_pair_features(seq({"a"}), seq({"b"}), m, kDefaultWordPairDimension);
  CHECK(f.dimension == 32768);
  CHECK(f.active_indices == std::vector<std::size_t>{16043});
  auto g = word_pair_features(seq({"a"}), seq({"b"}), m, 1000);
  CHECK(g.active_indices == std::vector<std::size_t>{859});
}

TEST_CASE("empty arguments and duplicates") {
  auto m = ab_clusters();
  CHECK(word_pair_features(TokenSequence{}, seq({"b"}), m, 64).active_indices.empty());
  CHECK(word_pair_features(seq({"a"}), TokenSequence{}, m, 64).active_indices.empty());
  CHECK(word_pair_features(seq({"a", "a"}), seq({"b"}), m, 64) ==
        word_pair_features(seq({"a"}), seq({"b"}), m, 64));
  CHECK_THROWS_AS(word_pair_features(seq({"a"}), seq({"b"}), m, 0), invalid_argument_error);
}

TEST_CASE("unknown tokens map to UNK") {
  auto m = ab_clusters();
  CHECK(m.cluster_of("zzz") == "UNK");
  auto f = word_pair_features(seq({"zzz"}), seq({"b"}), m, kDefaultWordPairDimension);
  CHECK(f.active_indices ==
        std::vector<std::size_t>{static_cast<std::size_t>(hash64("UNK|10") % 32768)});
}

TEST_CASE("features depend only on cluster sets") {
  Rng rng(4);
  BrownClusterMap m;
  const char* bits[] = {"0", "1", "00", "01", "10", "110"};
  for (int i = 0; i < 20; ++i) m.insert(testing::vocab_word(i), bits[i % 6]);
  for (int trial = 0; trial < 100; ++trial) {
    TokenSequence a, b;
    for (std::size_t i = 0, n = rng.below(6); i < n; ++i)
      a.tokens.push_back(testing::vocab_word(rng.below(25)));
    for (std::size_t i = 0, n = 1 + rng.below(6); i < n; ++i)
      b.tokens.push_back(testing::vocab_word(rng.below(25)));
    auto f = word_pair_features(a, b, m, 97);
    auto a2 = a, b2 = b;
    rng.shuffle(std::span<std::string>(a2.tokens));
    rng.shuffle(std::span<std::string>(b2.tokens));
    if (!a2.tokens.empty()) a2.tokens.push_back(a2.tokens.front());
    CHECK(word_pair_features(a2, b2, m, 97) == f);
    CHECK(std::is_sorted(f.active_indices.begin(), f.active_indices.end()));
    CHECK(std::adjacent_find(f.active_indices.begin(), f.active_indices.end()) ==
          f.active_indices.end());
    for (auto i : f.active_indices) CHECK(i < 97);
  }
}

TEST_CASE("cluster id validation") {
  BrownClusterMap m;
  CHECK_THROWS_AS(m.insert("x", ""), invalid_argument_error);
  CHECK_THROWS_AS(m.insert("x", "012"), invalid_argument_error);
  m.insert("x", "UNK");
  CHECK(m.cluster_of("x") == "UNK");
}

TEST_CASE("Brown cluster file load and round-trip") {
  auto dir = testing::temp_dir("brown");
  {
    std::ofstream f(dir / "c.txt");
    f << "0110\tthe\t5000\n10\tcat\n111\tcafé\t3\n";
  }
  auto m = load_brown_clusters(dir / "c.txt");
  CHECK(m.size() == 3);
  CHECK(m.cluster_of("the") == "0110");
  CHECK(m.cluster_of("cat") == "10");
  CHECK(m.cluster_of("café") == "111");
  save_brown_clusters(m, dir / "d.txt");
  CHECK(load_brown_clusters(dir / "d.txt") == m);

  {
    std::ofstream f(dir / "bad.txt");
    f << "0110\tthe\n10 cat\n";
  }
  try {
    load_brown_clusters(dir / "bad.txt");
    FAIL("expected format_error");
  } catch (const format_error& e) {
    CHECK(e.line() == 2);
  }
  {
    std::ofstream f(dir / "dup.txt");
    f << "0\tthe\n1\tthe\n";
  }
  CHECK_THROWS_AS(load_brown_clusters(dir / "dup.txt"), format_error);
  {
    std::ofstream f(dir / "bits.txt");
    f << "0a1\tthe\n";
  }
  CHECK_THROWS_AS(load_brown_clusters(dir / "bits.txt"), format_error);
}

}  // TEST_SUITE
