#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace annomap {

inline constexpr std::uint32_t kDefaultFeatureDim = 1u << 18;
inline constexpr int kDefaultNgramOrder = 2;

// L2-normalized hashed n-gram vector. Entries are kept in index order so
// iteration is deterministic; zero weights are never stored.
struct SparseVector {
  std::uint32_t dim = 0;
  std::map<std::uint32_t, double> entries;

  double l2_norm() const;
  bool operator==(const SparseVector&) const = default;
};

// Lowercased word tokens. Placeholder tokens such as <url> and <user> are
// kept whole; every other punctuation character becomes its own token.
std::vector<std::string> tokenize(std::string_view text);

// Hashes 1..ngram_order grams into dim buckets (FNV-1a) and L2-normalizes.
// Empty token lists map to the zero vector.
SparseVector featurize(const std::vector<std::string>& tokens, std::uint32_t dim,
                       int ngram_order = kDefaultNgramOrder);

}  // namespace annomap
