#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dripper/error.hpp"

namespace dripper {

enum class Phase : unsigned char { Structural, Decision, Done };

inline std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Structural: return "Structural";
    case Phase::Decision: return "Decision";
    case Phase::Done: return "Done";
  }
  return "?";
}

inline constexpr std::string_view kMainLiteral = "main";
inline constexpr std::string_view kOtherLiteral = "other";

struct DecodeState {
  std::size_t block_index = 1;  // block being decided, or the next one to decide
  Phase phase = Phase::Structural;
  std::string emitted;
  std::size_t decisions = 0;
};

struct FsmStep {
  std::vector<std::string> allowed;
  Phase next_phase = Phase::Structural;
};

/// Allowed continuations at `state` for a template with `n` keys. Structural
/// steps return the single forced fragment, Decision steps {main, other}.
inline FsmStep fsm_next(const DecodeState& state, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "label template needs at least one block");
  switch (state.phase) {
    case Phase::Done:
      throw Error(ErrorCode::InvalidState, "decoder already finished");
    case Phase::Decision:
      return {{std::string(kMainLiteral), std::string(kOtherLiteral)}, Phase::Structural};
    case Phase::Structural:
      break;
  }
  if (state.decisions == 0) return {{"{\"1\": \""}, Phase::Decision};
  if (state.decisions < n) {
    return {{"\", \"" + std::to_string(state.decisions + 1) + "\": \""}, Phase::Decision};
  }
  return {{"\"}"}, Phase::Done};
}

namespace detail {

// Applies a step already computed by fsm_next for this state.
inline void fsm_commit(DecodeState& state, const FsmStep& step, std::string_view fragment) {
  state.emitted += fragment;
  if (state.phase == Phase::Decision) {
    ++state.decisions;
  } else if (step.next_phase == Phase::Decision) {
    state.block_index = state.decisions + 1;
  }
  state.phase = step.next_phase;
}

}  // namespace detail

/// Appends `fragment`, which must be one of fsm_next's allowed continuations.
inline void fsm_advance(DecodeState& state, std::size_t n, std::string_view fragment) {
  FsmStep step = fsm_next(state, n);
  bool ok = false;
  for (const std::string& a : step.allowed) ok = ok || a == fragment;
  if (!ok) throw Error(ErrorCode::InvalidState, "fragment not allowed: " + std::string(fragment));
  detail::fsm_commit(state, step, fragment);
}

/// Character-level view of the same automaton, for masking arbitrary
/// tokenizer vocabularies: a piece of text is acceptable when every character
/// extends a prefix of an allowed continuation.
class FsmMatcher {
 public:
  explicit FsmMatcher(std::size_t n) : n_(n) { fsm_next(state_, n_); }

  [[nodiscard]] bool done() const { return state_.phase == Phase::Done && pending_.empty(); }
  [[nodiscard]] const DecodeState& state() const { return state_; }
  [[nodiscard]] std::string_view pending() const { return pending_; }

  [[nodiscard]] bool can_accept(std::string_view text) const {
    FsmMatcher copy = *this;
    return copy.accept(text);
  }

  /// Consumes `text`; on failure the matcher is left unchanged.
  bool accept(std::string_view text) {
    DecodeState state = state_;
    std::string pending = pending_;
    for (char c : text) {
      if (state.phase == Phase::Done) return false;
      pending.push_back(c);
      const FsmStep step = fsm_next(state, n_);
      const std::string* complete = nullptr;
      bool prefix = false;
      for (const std::string& a : step.allowed) {
        if (a.size() >= pending.size() && a.compare(0, pending.size(), pending) == 0) {
          prefix = true;
          if (a.size() == pending.size()) complete = &a;
        }
      }
      if (!prefix) return false;
      if (complete != nullptr) {
        fsm_advance(state, n_, *complete);
        pending.clear();
      }
    }
    state_ = std::move(state);
    pending_ = std::move(pending);
    return true;
  }

 private:
  std::size_t n_;
  DecodeState state_;
  std::string pending_;
};

/// Masks next-token logits so that only tokens the automaton can accept keep
/// their score. The end-of-sequence token is allowed exactly when the object
/// has been closed.
class LabelLogitsProcessor {
 public:
  LabelLogitsProcessor(std::vector<std::string> vocabulary, std::size_t eos_id, std::size_t n)
      : vocabulary_(std::move(vocabulary)), eos_id_(eos_id), matcher_(n) {
    if (eos_id_ >= vocabulary_.size()) throw Error(ErrorCode::InvalidArgument, "eos id outside vocabulary");
  }

  void apply(std::vector<float>& logits) const {
    if (logits.size() != vocabulary_.size()) throw Error(ErrorCode::InvalidArgument, "logits size != vocabulary size");
    constexpr float kMasked = -std::numeric_limits<float>::infinity();
    for (std::size_t id = 0; id < logits.size(); ++id) {
      if (!allowed(id)) logits[id] = kMasked;
    }
  }

  [[nodiscard]] bool allowed(std::size_t id) const {
    if (id == eos_id_) return matcher_.done();
    const std::string& piece = vocabulary_[id];
    return !piece.empty() && matcher_.can_accept(piece);
  }

  /// Records the sampled token. Returns false once the sequence is complete.
  bool consume(std::size_t id) {
    if (id == eos_id_) {
      if (!matcher_.done()) throw Error(ErrorCode::InvalidState, "end of sequence before the object was closed");
      finished_ = true;
      return false;
    }
    if (!matcher_.accept(vocabulary_.at(id))) throw Error(ErrorCode::InvalidState, "token violates the label grammar");
    return true;
  }

  [[nodiscard]] bool finished() const { return finished_; }
  [[nodiscard]] const FsmMatcher& matcher() const { return matcher_; }

 private:
  std::vector<std::string> vocabulary_;
  std::size_t eos_id_;
  FsmMatcher matcher_;
  bool finished_ = false;
};

}  // namespace dripper
