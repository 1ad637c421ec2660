#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dripper/classifier.hpp"
#include "dripper/error.hpp"
#include "dripper/labels.hpp"
#include "dripper/markdown.hpp"
#include "dripper/postprocess.hpp"
#include "dripper/preprocess.hpp"
#include "dripper/subprocess.hpp"
#include "dripper/tokenizer.hpp"

namespace dripper {

struct ExtractionResult {
  std::string main_html;
  std::string markdown;
  LabelSequence labels;
  bool oversize = false;
  bool used_fallback = false;
  std::size_t n_blocks = 0;
  std::size_t simplified_token_count = 0;
  std::vector<std::string> diagnostics;
};

struct FallbackOptions {
  std::vector<std::string> command;  // argv; empty selects the built-in path
  std::chrono::milliseconds timeout{30000};
};

struct ExtractOptions {
  std::size_t context_limit = kDefaultContextLimit;
  bool fallback = false;
  FallbackOptions fallback_options;
  SimplifyConfig simplify;
  const Tokenizer* tokenizer = nullptr;  // default_tokenizer() when null
  std::optional<std::string> encoding_hint;

  [[nodiscard]] const Tokenizer& token_counter() const { return tokenizer ? *tokenizer : default_tokenizer(); }
};

namespace detail {

inline bool looks_like_html(std::string_view s) {
  const std::string_view t = trim_ascii(s);
  return !t.empty() && t.front() == '<';
}

inline std::optional<std::string_view> hint_of(const ExtractOptions& options) {
  if (options.encoding_hint) return std::string_view(*options.encoding_hint);
  return std::nullopt;
}

}  // namespace detail

/// Built-in extraction without the context gate: heuristic labels over the
/// full document.
inline ExtractionResult heuristic_extract(std::string_view raw_html, const ExtractOptions& options) {
  ExtractionResult r;
  const DocumentPair pair =
      build_document_pair(raw_html, options.simplify, options.token_counter(), detail::hint_of(options));
  r.n_blocks = pair.n_blocks;
  r.simplified_token_count = pair.simplified_token_count;
  r.labels = classify_heuristic(pair);
  const DomTree main = select_blocks_tree(pair, r.labels);
  r.main_html = serialize(main);
  r.markdown = dom_to_markdown(main, main.root());
  return r;
}

/// Secondary extractor: the configured external command if any, else (or
/// when the command fails) the built-in heuristic path.
inline ExtractionResult fallback_extract(std::string_view raw_html, const ExtractOptions& options) {
  std::vector<std::string> diagnostics;
  const FallbackOptions& fb = options.fallback_options;
  if (!fb.command.empty()) {
    const SubprocessResult run = run_subprocess(fb.command, raw_html, fb.timeout);
    if (run.started && !run.timed_out && run.exit_code == 0 && detail::has_visible_text(run.out)) {
      ExtractionResult r;
      r.used_fallback = true;
      if (detail::looks_like_html(run.out)) {
        r.main_html = run.out;
        r.markdown = html_to_markdown(run.out);
      } else {
        r.markdown = run.out;
      }
      r.diagnostics.push_back("fallback: external command");
      return r;
    }
    std::string why = run.timed_out ? "timed out" : !run.started ? "could not start" : run.exit_code != 0 ? "exit code " + std::to_string(run.exit_code) : "empty output";
    if (!detail::trim_ascii(run.err).empty()) why += ": " + std::string(detail::trim_ascii(run.err).substr(0, 200));
    diagnostics.push_back("fallback command failed (" + why + "), using built-in extractor");
  }
  ExtractionResult r;
  try {
    r = heuristic_extract(raw_html, options);
  } catch (const Error& e) {
    throw Error(ErrorCode::FallbackFailed, std::string("fallback produced no output: ") + e.what());
  }
  if (!detail::has_visible_text(r.markdown)) throw Error(ErrorCode::FallbackFailed, "fallback produced no output");
  r.used_fallback = true;
  r.labels = {};
  diagnostics.emplace_back("fallback: built-in heuristic");
  r.diagnostics = std::move(diagnostics);
  return r;
}

/// The three-stage pipeline: simplify, classify, prune and convert. Oversize
/// pages are gated (or routed to the fallback), as are empty classifications
/// when the fallback is enabled.
inline ExtractionResult extract(std::string_view raw_html, const Classifier& classifier, const ExtractOptions& options = {}) {
  if (options.context_limit < 1) throw Error(ErrorCode::InvalidConfig, "context_limit must be >= 1");
  const DocumentPair pair =
      build_document_pair(raw_html, options.simplify, options.token_counter(), detail::hint_of(options));
  ExtractionResult r;
  r.n_blocks = pair.n_blocks;
  r.simplified_token_count = pair.simplified_token_count;

  if (pair.simplified_token_count > options.context_limit) {
    const std::string why = "oversize: " + std::to_string(pair.simplified_token_count) + " tokens > " +
                            std::to_string(options.context_limit);
    if (!options.fallback) {
      r.oversize = true;
      r.diagnostics.push_back(why);
      return r;
    }
    ExtractionResult fb = fallback_extract(raw_html, options);
    fb.oversize = true;
    fb.n_blocks = pair.n_blocks;
    fb.simplified_token_count = pair.simplified_token_count;
    fb.diagnostics.insert(fb.diagnostics.begin(), why);
    return fb;
  }

  r.labels = classifier.classify(pair);
  const DomTree main = select_blocks_tree(pair, r.labels);
  r.main_html = serialize(main);
  r.markdown = dom_to_markdown(main, main.root());
  if (options.fallback && (r.labels.main_count() == 0 || !detail::has_visible_text(r.markdown))) {
    ExtractionResult fb = fallback_extract(raw_html, options);
    fb.n_blocks = pair.n_blocks;
    fb.simplified_token_count = pair.simplified_token_count;
    fb.diagnostics.insert(fb.diagnostics.begin(), "classifier returned no main content");
    return fb;
  }
  return r;
}

}  // namespace dripper
