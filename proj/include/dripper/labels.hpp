#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace dripper {

enum class BlockLabel : unsigned char { Other = 0, Main = 1 };

inline std::string_view to_string(BlockLabel label) { return label == BlockLabel::Main ? "main" : "other"; }

struct LabelSequence {
  std::vector<BlockLabel> labels;

  [[nodiscard]] std::size_t n() const { return labels.size(); }
  [[nodiscard]] bool empty() const { return labels.empty(); }
  [[nodiscard]] std::size_t main_count() const {
    std::size_t k = 0;
    for (BlockLabel l : labels) k += l == BlockLabel::Main ? 1 : 0;
    return k;
  }
  BlockLabel operator[](std::size_t i) const { return labels[i]; }

  friend bool operator==(const LabelSequence&, const LabelSequence&) = default;
};

/// Canonical rendering: {"1": "main", "2": "other"}. This is the exact string
/// the constrained decoder emits.
inline std::string to_json_string(const LabelSequence& seq) {
  std::string out = "{";
  for (std::size_t i = 0; i < seq.labels.size(); ++i) {
    if (i > 0) out += ", ";
    out += '"';
    out += std::to_string(i + 1);
    out += "\": \"";
    out += to_string(seq.labels[i]);
    out += '"';
  }
  out += '}';
  return out;
}

}  // namespace dripper
