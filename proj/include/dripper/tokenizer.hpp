#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "dripper/detail/utf8.hpp"

namespace dripper {

/// Token counting used for context gating and the overhead report. Swap in an
/// adapter around the real model vocabulary when exact counts matter.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  [[nodiscard]] virtual std::vector<std::string> tokenize(std::string_view text) const = 0;
  [[nodiscard]] virtual std::size_t count(std::string_view text) const { return tokenize(text).size(); }
};

/// Whitespace-separated word runs, with every punctuation mark and every CJK
/// codepoint counted as a token of its own.
class ApproximateTokenizer final : public Tokenizer {
 public:
  [[nodiscard]] std::vector<std::string> tokenize(std::string_view text) const override {
    std::vector<std::string> tokens;
    scan(text, [&](std::string_view tok) { tokens.emplace_back(tok); });
    return tokens;
  }

  [[nodiscard]] std::size_t count(std::string_view text) const override {
    std::size_t n = 0;
    scan(text, [&](std::string_view) { ++n; });
    return n;
  }

 private:
  template <typename Sink>
  static void scan(std::string_view text, Sink&& sink) {
    std::size_t word_begin = std::string_view::npos;
    std::size_t i = 0;
    auto close_word = [&] {
      if (word_begin != std::string_view::npos) sink(text.substr(word_begin, i - word_begin));
      word_begin = std::string_view::npos;
    };
    while (i < text.size()) {
      const auto d = detail::decode_utf8(text, i);
      if (detail::is_space(d.value)) {
        close_word();
      } else if (detail::is_punctuation(d.value) || detail::is_cjk(d.value)) {
        close_word();
        sink(text.substr(i, d.length));
      } else if (word_begin == std::string_view::npos) {
        word_begin = i;
      }
      i += d.length;
    }
    close_word();
  }
};

inline const Tokenizer& default_tokenizer() {
  static const ApproximateTokenizer tokenizer;
  return tokenizer;
}

}  // namespace dripper
