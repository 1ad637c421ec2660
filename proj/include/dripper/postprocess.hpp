#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dripper/dom.hpp"
#include "dripper/error.hpp"
#include "dripper/labels.hpp"
#include "dripper/preprocess.hpp"

namespace dripper {

/// Prunes a copy of the Mapping tree down to the Main blocks plus their
/// ancestor chains. Where removed content separated two kept siblings a
/// newline text node is left behind so their text cannot run together.
inline DomTree select_blocks_tree(const DocumentPair& pair, const LabelSequence& labels) {
  if (labels.n() != pair.n_blocks || pair.blocks.size() != pair.n_blocks) {
    throw Error(ErrorCode::LabelMismatch, std::to_string(labels.n()) + " labels for " + std::to_string(pair.n_blocks) +
                                              " blocks");
  }
  DomTree tree = pair.mapping;
  // 0 = drop, 1 = on an ancestor chain, 2 = inside a kept block
  std::vector<unsigned char> role(tree.arena_size(), 0);
  auto keep_chain = [&](NodeHandle h) {
    for (NodeHandle p = tree.parent(h); p.valid() && role[p.index()] == 0; p = tree.parent(p)) role[p.index()] = 1;
  };
  for (std::size_t i = 0; i < pair.blocks.size(); ++i) {
    if (labels[i] != BlockLabel::Main) continue;
    for (NodeHandle h : pair.blocks[i].mapping_nodes) {
      role[h.index()] = 2;
      keep_chain(h);
    }
  }
  if (const NodeHandle body = tree.find_first("body"); body.valid()) {
    if (role[body.index()] == 0) role[body.index()] = 1;
    keep_chain(body);
  }

  std::vector<NodeHandle> stack{tree.root()};
  while (!stack.empty()) {
    const NodeHandle h = stack.back();
    stack.pop_back();
    const std::vector<NodeHandle> kids(tree.children(h).begin(), tree.children(h).end());
    bool kept_before = false;
    bool gap = false;
    for (NodeHandle c : kids) {
      const unsigned char r = role[c.index()];
      if (r == 0) {
        const bool blank_text = tree.is_text(c) && !detail::has_visible_text(tree.text(c));
        const bool ignorable = blank_text || tree.kind(c) == NodeKind::Comment || tree.kind(c) == NodeKind::Doctype;
        if (!ignorable) gap = true;
        tree.remove(c);
        continue;
      }
      if (gap && kept_before) tree.insert_before(h, tree.create_text("\n"), c);
      gap = false;
      kept_before = true;
      if (r == 1) stack.push_back(c);
    }
  }
  return tree;
}

/// Main HTML: the serialized pruned Mapping tree.
inline std::string select_blocks(const DocumentPair& pair, const LabelSequence& labels) {
  return serialize(select_blocks_tree(pair, labels));
}

}  // namespace dripper
