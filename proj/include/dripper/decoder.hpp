#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dripper/error.hpp"
#include "dripper/fsm.hpp"
#include "dripper/labels.hpp"
#include "dripper/tokenizer.hpp"

namespace dripper {

struct DecodeContext {
  std::string_view prompt;
  std::string_view emitted;
  std::size_t block_index = 0;
  std::size_t n_blocks = 0;
};

/// The small language model behind the decoder. Only Decision points reach
/// the model; it returns one relative score per candidate.
class TokenModel {
 public:
  virtual ~TokenModel() = default;
  [[nodiscard]] virtual std::vector<double> score(const DecodeContext& context,
                                                  std::span<const std::string> candidates) const = 0;
  [[nodiscard]] virtual std::vector<std::string> tokenize(std::string_view text) const {
    return default_tokenizer().tokenize(text);
  }
};

struct DecodeResult {
  std::string emitted;
  LabelSequence labels;
  std::size_t decisions = 0;      // model queries made
  std::size_t output_tokens = 0;  // emitted length in model tokens
};

namespace detail {

// Greedy pick between main and other. Anything that is not a clean, finite
// preference for main (wrong arity, NaN, ties) falls back to other.
inline std::size_t pick_candidate(const std::vector<double>& scores, std::span<const std::string> candidates) {
  std::size_t main_idx = candidates.size();
  std::size_t other_idx = candidates.size();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i] == kMainLiteral) main_idx = i;
    if (candidates[i] == kOtherLiteral) other_idx = i;
  }
  if (scores.size() != candidates.size()) return other_idx;
  const double m = scores[main_idx];
  const double o = scores[other_idx];
  if (std::isfinite(m) && !std::isnan(o) && (m > o)) return main_idx;
  return other_idx;
}

}  // namespace detail

/// Runs the automaton to completion for `n` blocks, consulting `model` at
/// each Decision point.
inline DecodeResult decode_labels(const TokenModel& model, std::size_t n, std::string_view prompt = {}) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "nothing to decode");
  DecodeState state;
  DecodeResult result;
  result.labels.labels.reserve(n);
  state.emitted.reserve(n * 18);
  std::unordered_map<std::string, std::size_t> token_counts;
  while (state.phase != Phase::Done) {
    FsmStep step = fsm_next(state, n);
    std::size_t chosen = 0;
    if (state.phase == Phase::Decision) {
      const DecodeContext context{prompt, state.emitted, state.block_index, n};
      chosen = detail::pick_candidate(model.score(context, step.allowed), step.allowed);
      ++result.decisions;
      result.labels.labels.push_back(step.allowed[chosen] == kMainLiteral ? BlockLabel::Main : BlockLabel::Other);
    }
    // Fragments repeat across blocks; count each distinct one once.
    const std::string& fragment = step.allowed[chosen];
    auto it = token_counts.find(fragment);
    if (it == token_counts.end()) it = token_counts.emplace(fragment, model.tokenize(fragment).size()).first;
    result.output_tokens += it->second;
    detail::fsm_commit(state, step, fragment);
  }
  result.emitted = std::move(state.emitted);
  return result;
}

/// Always prefers one label.
class ConstantTokenModel final : public TokenModel {
 public:
  explicit ConstantTokenModel(BlockLabel preferred) : preferred_(preferred) {}
  [[nodiscard]] std::vector<double> score(const DecodeContext&, std::span<const std::string> candidates) const override {
    std::vector<double> s;
    for (const std::string& c : candidates) s.push_back(c == to_string(preferred_) ? 1.0 : 0.0);
    return s;
  }

 private:
  BlockLabel preferred_;
};

/// Uniform scores that depend only on (seed, block, candidate), so a run is
/// reproducible and the model object is stateless.
class SeededRandomTokenModel final : public TokenModel {
 public:
  explicit SeededRandomTokenModel(std::uint64_t seed) : seed_(seed) {}
  [[nodiscard]] std::vector<double> score(const DecodeContext& context,
                                          std::span<const std::string> candidates) const override {
    std::vector<double> s;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const std::uint64_t h = mix(seed_ ^ mix(context.block_index * 0x9E3779B97F4A7C15ULL + i));
      s.push_back(static_cast<double>(h >> 11) * 0x1.0p-53);
    }
    return s;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  std::uint64_t seed_;
};

/// Scores each block from a fixed per-block probability of being main, e.g.
/// one computed by the heuristic classifier. Backs the offline "mock" mode.
class PriorTokenModel final : public TokenModel {
 public:
  explicit PriorTokenModel(std::vector<double> main_probability) : p_(std::move(main_probability)) {}
  [[nodiscard]] std::vector<double> score(const DecodeContext& context,
                                          std::span<const std::string> candidates) const override {
    const double p = context.block_index >= 1 && context.block_index <= p_.size() ? p_[context.block_index - 1] : 0.0;
    std::vector<double> s;
    for (const std::string& c : candidates) s.push_back(c == kMainLiteral ? p : 1.0 - p);
    return s;
  }

 private:
  std::vector<double> p_;
};

}  // namespace dripper
