#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dripper/detail/utf8.hpp"
#include "dripper/error.hpp"

namespace dripper {

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int n = 5;
};

namespace detail {

// Simple case folding: ASCII, Latin-1, Greek and Cyrillic capitals.
inline char32_t fold_case(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  return cp;
}

}  // namespace detail

/// Lowercased word runs split on whitespace and punctuation; CJK codepoints
/// are tokens of their own.
inline std::vector<std::string> rouge_tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) tokens.push_back(std::move(word));
    word.clear();
  };
  for (std::size_t i = 0; i < text.size();) {
    const auto d = detail::decode_utf8(text, i);
    i += d.length;
    if (detail::is_space(d.value) || detail::is_punctuation(d.value)) {
      flush();
    } else if (detail::is_cjk(d.value)) {
      flush();
      detail::append_utf8(word, d.value);
      flush();
    } else {
      detail::append_utf8(word, detail::fold_case(d.value));
    }
  }
  flush();
  return tokens;
}

/// Plug point for a different word segmenter.
using RougeTokenizer = std::function<std::vector<std::string>(std::string_view)>;

inline RougeScore rouge_n_f1_tokens(const std::vector<std::string>& pred, const std::vector<std::string>& gold, int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "rouge n must be >= 1");
  const auto un = static_cast<std::size_t>(n);
  auto grams = [&](const std::vector<std::string>& toks) {
    std::unordered_map<std::string, std::size_t> counts;
    if (toks.size() < un) return counts;
    for (std::size_t i = 0; i + un <= toks.size(); ++i) {
      std::string key;
      for (std::size_t k = 0; k < un; ++k) {
        key += toks[i + k];
        key += '\x1f';
      }
      ++counts[key];
    }
    return counts;
  };
  const auto pc = grams(pred);
  const auto gc = grams(gold);
  const std::size_t pred_total = pred.size() >= un ? pred.size() - un + 1 : 0;
  const std::size_t gold_total = gold.size() >= un ? gold.size() - un + 1 : 0;
  std::size_t matched = 0;
  for (const auto& [g, c] : pc) {
    if (auto it = gc.find(g); it != gc.end()) matched += std::min(c, it->second);
  }
  RougeScore s;
  s.n = n;
  s.precision = pred_total ? static_cast<double>(matched) / static_cast<double>(pred_total) : 0.0;
  s.recall = gold_total ? static_cast<double>(matched) / static_cast<double>(gold_total) : 0.0;
  // 2m/(P+G) is the harmonic mean of m/P and m/G, computed without the
  // intermediate rounding.
  s.f1 = matched ? 2.0 * static_cast<double>(matched) / static_cast<double>(pred_total + gold_total) : 0.0;
  return s;
}

inline RougeScore rouge_n_f1(std::string_view pred, std::string_view gold, int n = 5,
                             const RougeTokenizer& tokenize = rouge_tokenize) {
  return rouge_n_f1_tokens(tokenize(pred), tokenize(gold), n);
}

}  // namespace dripper
