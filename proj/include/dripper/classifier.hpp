#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dripper/decoder.hpp"
#include "dripper/error.hpp"
#include "dripper/labels.hpp"
#include "dripper/preprocess.hpp"
#include "dripper/prompt.hpp"

namespace dripper {

inline constexpr std::size_t kDefaultContextLimit = 32768;

/// Produces one label per block. Implementations must tolerate concurrent
/// calls from several threads.
class Classifier {
 public:
  virtual ~Classifier() = default;
  [[nodiscard]] virtual LabelSequence classify(const DocumentPair& doc) const = 0;
  [[nodiscard]] virtual std::string_view name() const = 0;
};

struct HeuristicOptions {
  std::size_t min_chars = 10;
  double max_link_ratio = 0.5;
};

inline BlockLabel heuristic_label(const Block& b, const HeuristicOptions& options = {}) {
  if (b.char_count == 0 || b.char_count < options.min_chars) return BlockLabel::Other;
  const double ratio = static_cast<double>(b.link_char_count) / static_cast<double>(b.char_count);
  return ratio < options.max_link_ratio ? BlockLabel::Main : BlockLabel::Other;
}

inline LabelSequence classify_heuristic(const DocumentPair& doc, const HeuristicOptions& options = {}) {
  LabelSequence seq;
  seq.labels.reserve(doc.blocks.size());
  for (const Block& b : doc.blocks) seq.labels.push_back(heuristic_label(b, options));
  return seq;
}

class HeuristicClassifier final : public Classifier {
 public:
  explicit HeuristicClassifier(HeuristicOptions options = {}) : options_(options) {}
  [[nodiscard]] LabelSequence classify(const DocumentPair& doc) const override { return classify_heuristic(doc, options_); }
  [[nodiscard]] std::string_view name() const override { return "heuristic"; }

 private:
  HeuristicOptions options_;
};

struct ConstrainedDecodeOptions {
  std::size_t context_limit = kDefaultContextLimit;
};

/// Constrained decoding over a DocumentPair: gate on the context limit, build
/// the prompt, and let the automaton drive the model.
inline DecodeResult constrained_decode_detailed(const TokenModel& model, const DocumentPair& doc,
                                                const ConstrainedDecodeOptions& options = {}) {
  if (doc.n_blocks == 0) throw Error(ErrorCode::InvalidArgument, "document has no blocks");
  if (doc.simplified_token_count > options.context_limit) {
    throw Error(ErrorCode::OversizeInput, std::to_string(doc.simplified_token_count) + " tokens exceed the context limit of " +
                                              std::to_string(options.context_limit));
  }
  const std::string prompt = build_prompt(doc.simplified, doc.item_attribute_name);
  return decode_labels(model, doc.n_blocks, prompt);
}

inline LabelSequence constrained_decode(const TokenModel& model, const DocumentPair& doc,
                                        const ConstrainedDecodeOptions& options = {}) {
  return constrained_decode_detailed(model, doc, options).labels;
}

class ConstrainedClassifier final : public Classifier {
 public:
  explicit ConstrainedClassifier(std::shared_ptr<const TokenModel> model, ConstrainedDecodeOptions options = {})
      : model_(std::move(model)), options_(options) {}
  [[nodiscard]] LabelSequence classify(const DocumentPair& doc) const override {
    return constrained_decode(*model_, doc, options_);
  }
  [[nodiscard]] std::string_view name() const override { return "constrained"; }

 private:
  std::shared_ptr<const TokenModel> model_;
  ConstrainedDecodeOptions options_;
};

/// Offline stand-in for the fine-tuned model: the heuristic's verdicts become
/// the scores of a mock model, and the labels go through the automaton.
class MockModelClassifier final : public Classifier {
 public:
  explicit MockModelClassifier(ConstrainedDecodeOptions options = {}, HeuristicOptions heuristic = {})
      : options_(options), heuristic_(heuristic) {}
  [[nodiscard]] LabelSequence classify(const DocumentPair& doc) const override {
    std::vector<double> prior;
    prior.reserve(doc.blocks.size());
    for (const Block& b : doc.blocks) prior.push_back(heuristic_label(b, heuristic_) == BlockLabel::Main ? 0.9 : 0.1);
    return constrained_decode(PriorTokenModel(std::move(prior)), doc, options_);
  }
  [[nodiscard]] std::string_view name() const override { return "mock"; }

 private:
  ConstrainedDecodeOptions options_;
  HeuristicOptions heuristic_;
};

/// Replays a precomputed label list; used for oracle runs.
class FixedClassifier final : public Classifier {
 public:
  explicit FixedClassifier(LabelSequence labels) : labels_(std::move(labels)) {}
  [[nodiscard]] LabelSequence classify(const DocumentPair&) const override { return labels_; }
  [[nodiscard]] std::string_view name() const override { return "fixed"; }

 private:
  LabelSequence labels_;
};

}  // namespace dripper
