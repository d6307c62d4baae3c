#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace idr {

// Ordered word tokens of one argument, w_1 ... w_T.
struct TokenSequence {
  std::vector<std::string> tokens;

  TokenSequence() = default;
  explicit TokenSequence(std::vector<std::string> t) : tokens(std::move(t)) {}
  TokenSequence(std::initializer_list<std::string> t) : tokens(t) {}

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  const std::string& operator[](std::size_t i) const { return tokens[i]; }
  auto begin() const { return tokens.begin(); }
  auto end() const { return tokens.end(); }

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

}  // namespace idr
