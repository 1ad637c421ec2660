#pragma once

// Checks tying the Simplified rendering to the Mapping tree, written
// against the parsed output rather than the chunker's internals.

#include <map>
#include <string>
#include <vector>

#include "dripper/detail/utf8.hpp"
#include "dripper/dom.hpp"
#include "dripper/html_parser.hpp"
#include "dripper/preprocess.hpp"

namespace dripper::testing {

// Non-whitespace codepoints with multiplicity.
inline std::map<std::string, int> char_multiset(const std::string& s) {
  std::map<std::string, int> counts;
  for (std::size_t i = 0; i < s.size();) {
    const auto d = detail::decode_utf8(s, i);
    if (!detail::is_space(d.value)) ++counts[s.substr(i, d.length)];
    i += d.length;
  }
  return counts;
}

inline bool is_char_subsequence(const std::string& needle, const std::string& hay) {
  std::size_t j = 0;
  for (std::size_t i = 0; i < needle.size();) {
    const auto d = detail::decode_utf8(needle, i);
    const std::string ch = needle.substr(i, d.length);
    const std::size_t at = hay.find(ch, j);
    if (at == std::string::npos) return false;
    j = at + ch.size();
    i += d.length;
  }
  return true;
}

/// Empty when ids 1..n appear in order in the simplified rendering, every
/// block maps to live nodes, and each block's simplified text is a
/// subsequence of its mapped text.
inline std::vector<std::string> alignment_violations(const DocumentPair& pair, const SimplifyConfig& config = {}) {
  std::vector<std::string> bad;
  if (pair.blocks.size() != pair.n_blocks) bad.push_back("block count differs from n_blocks");
  const DomTree simplified = parse_html_text(pair.simplified);
  std::vector<std::string> ids;
  simplified.visit(simplified.root(), [&](NodeHandle h) {
    if (simplified.is_element(h)) {
      if (const std::string* v = simplified.attribute(h, config.item_attribute_name)) ids.push_back(*v);
    }
    return true;
  });
  if (ids.size() != pair.n_blocks) {
    bad.push_back(std::to_string(ids.size()) + " ids for " + std::to_string(pair.n_blocks) + " blocks");
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] != std::to_string(i + 1)) bad.push_back("id " + ids[i] + " at position " + std::to_string(i + 1));
  }
  for (std::size_t i = 0; i < pair.blocks.size(); ++i) {
    const Block& b = pair.blocks[i];
    if (b.id != i + 1) bad.push_back("block " + std::to_string(i + 1) + " carries id " + std::to_string(b.id));
    if (b.mapping_nodes.empty()) bad.push_back("block " + std::to_string(b.id) + " maps to nothing");
    for (NodeHandle h : b.mapping_nodes) {
      if (!pair.mapping.is_connected(h)) bad.push_back("block " + std::to_string(b.id) + " maps to a detached node");
    }
    const std::string simple_text =
        detail::normalize_whitespace(text_content(parse_html_text(b.simplified_html), NodeHandle{0}));
    const std::string mapping_text = detail::normalize_whitespace(text_content(pair.mapping, b.mapping_nodes));
    if (!is_char_subsequence(simple_text, mapping_text)) {
      bad.push_back("block " + std::to_string(b.id) + " text is not a subsequence of its mapping");
    }
  }
  return bad;
}

}  // namespace dripper::testing
