#include "annomap/featurizer.hpp"

#include <cctype>
#include <cmath>

#include "annomap/errors.hpp"
#include "annomap/io.hpp"

namespace annomap {

namespace {

bool is_word_char(unsigned char c) {
  return std::isalnum(c) != 0 || c >= 0x80;  // non-ASCII bytes stay inside word runs
}

bool is_placeholder_char(unsigned char c) {
  return std::isalnum(c) != 0 || c == '_';
}

}  // namespace

double SparseVector::l2_norm() const {
  double sum = 0.0;
  for (const auto& [idx, w] : entries) sum += w * w;
  return std::sqrt(sum);
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (c == '<') {
      // <url>-like placeholder: keep as one token
      std::size_t j = i + 1;
      while (j < n && is_placeholder_char(static_cast<unsigned char>(text[j]))) ++j;
      if (j > i + 1 && j < n && text[j] == '>') {
        std::string tok;
        for (std::size_t k = i; k <= j; ++k)
          tok.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[k]))));
        tokens.push_back(std::move(tok));
        i = j + 1;
        continue;
      }
    }
    if (is_word_char(c)) {
      std::size_t j = i;
      std::string tok;
      while (j < n && is_word_char(static_cast<unsigned char>(text[j]))) {
        tok.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[j]))));
        ++j;
      }
      tokens.push_back(std::move(tok));
      i = j;
      continue;
    }
    tokens.push_back(std::string(1, static_cast<char>(c)));  // punctuation: one token per char
    ++i;
  }
  return tokens;
}

SparseVector featurize(const std::vector<std::string>& tokens, std::uint32_t dim,
                       int ngram_order) {
  if (dim < 2) throw ValidationError("feature dimension must be >= 2");
  if (ngram_order < 1) throw ValidationError("ngram order must be >= 1");
  SparseVector vec;
  vec.dim = dim;
  // n-grams are joined with a 0x1f separator and tagged with their order so
  // equal strings of different orders hash apart.
  for (int order = 1; order <= ngram_order; ++order) {
    if (tokens.size() < static_cast<std::size_t>(order)) break;
    const char order_tag = static_cast<char>(order);
    for (std::size_t start = 0; start + order <= tokens.size(); ++start) {
      std::uint64_t h = fnv1a64(std::string_view(&order_tag, 1));
      for (int g = 0; g < order; ++g) {
        h = fnv1a64(tokens[start + g], h);
        if (g + 1 < order) h = fnv1a64(std::string_view("\x1f", 1), h);
      }
      vec.entries[static_cast<std::uint32_t>(h % dim)] += 1.0;
    }
  }
  double norm = vec.l2_norm();
  if (norm > 0.0) {
    for (auto& [idx, w] : vec.entries) w /= norm;
  }
  return vec;
}

}  // namespace annomap
