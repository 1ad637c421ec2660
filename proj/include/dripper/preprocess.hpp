#pragma once

#include <cstddef>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dripper/detail/utf8.hpp"
#include "dripper/dom.hpp"
#include "dripper/error.hpp"
#include "dripper/html_parser.hpp"
#include "dripper/tokenizer.hpp"

namespace dripper {

using TagSet = std::set<std::string, std::less<>>;

struct SimplifyConfig {
  TagSet removed_tags{"script", "style",  "noscript", "header", "footer", "nav", "aside",
                      "iframe", "svg",    "form",     "button", "link",   "meta"};
  TagSet kept_attributes{"class", "id"};
  std::size_t paragraph_truncation_chars = 200;
  std::size_t table_cell_keep = 12;
  std::size_t list_item_keep = 10;
  TagSet block_level_tags{"p",  "div", "h1",  "h2", "h3", "h4",         "h5",      "h6",     "table", "ul",
                          "ol", "dl",  "pre", "hr", "li", "blockquote", "article", "section", "figure"};
  std::string item_attribute_name = "item-id";

  /// Enforces the invariants: class and id are always kept, limits are
  /// positive, the id attribute has a name.
  void validate() {
    kept_attributes.insert("class");
    kept_attributes.insert("id");
    if (paragraph_truncation_chars < 1) throw Error(ErrorCode::InvalidConfig, "paragraph_truncation_chars must be >= 1");
    if (table_cell_keep < 1) throw Error(ErrorCode::InvalidConfig, "table_cell_keep must be >= 1");
    if (list_item_keep < 1) throw Error(ErrorCode::InvalidConfig, "list_item_keep must be >= 1");
    if (item_attribute_name.empty()) throw Error(ErrorCode::InvalidConfig, "item_attribute_name is empty");
  }
};

namespace detail {

inline TagSet read_tag_set(const nlohmann::json& j, std::string_view key) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidConfig, std::string(key) + " must be an array of strings");
  TagSet out;
  for (const auto& item : j) {
    if (!item.is_string()) throw Error(ErrorCode::InvalidConfig, std::string(key) + " must be an array of strings");
    out.insert(ascii_lower(item.get<std::string>()));
  }
  return out;
}

inline std::size_t read_count(const nlohmann::json& j, std::string_view key) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw Error(ErrorCode::InvalidConfig, std::string(key) + " must be a non-negative integer");
  }
  return j.get<std::size_t>();
}

}  // namespace detail

/// Applies the keys present in `j` on top of `base`. Unknown keys are an
/// error so that typos do not pass silently.
inline SimplifyConfig simplify_config_from_json(const nlohmann::json& j, SimplifyConfig base = {}) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "removed_tags") base.removed_tags = detail::read_tag_set(value, key);
    else if (key == "kept_attributes") base.kept_attributes = detail::read_tag_set(value, key);
    else if (key == "block_level_tags") base.block_level_tags = detail::read_tag_set(value, key);
    else if (key == "paragraph_truncation_chars") base.paragraph_truncation_chars = detail::read_count(value, key);
    else if (key == "table_cell_keep") base.table_cell_keep = detail::read_count(value, key);
    else if (key == "list_item_keep") base.list_item_keep = detail::read_count(value, key);
    else if (key == "item_attribute_name") {
      if (!value.is_string()) throw Error(ErrorCode::InvalidConfig, "item_attribute_name must be a string");
      base.item_attribute_name = value.get<std::string>();
    } else {
      throw Error(ErrorCode::InvalidConfig, "unknown config key: " + key);
    }
  }
  base.validate();
  return base;
}

inline nlohmann::json to_json(const SimplifyConfig& c) {
  return {{"removed_tags", c.removed_tags},
          {"kept_attributes", c.kept_attributes},
          {"paragraph_truncation_chars", c.paragraph_truncation_chars},
          {"table_cell_keep", c.table_cell_keep},
          {"list_item_keep", c.list_item_keep},
          {"block_level_tags", c.block_level_tags},
          {"item_attribute_name", c.item_attribute_name}};
}

inline SimplifyConfig load_simplify_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::UnreadableFile, "cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config is not valid JSON: ") + e.what());
  }
  return simplify_config_from_json(j);
}

struct Block {
  std::size_t id = 0;
  std::string simplified_html;
  std::vector<NodeHandle> mapping_nodes;
  NodeHandle simplified_node;  // element carrying the id attribute in simplified_tree
  bool wrapped = false;        // simplified_node is a span added around an inline run
  std::string tag;  // tag of a single-element block, "inline" for a run of inline content
  std::string text;  // whitespace-normalized text before truncation
  std::size_t char_count = 0;
  std::size_t link_char_count = 0;
  bool truncated = false;
};

struct DocumentPair {
  std::string simplified;  // full rendering, blocks plus skeleton
  std::vector<Block> blocks;
  DomTree mapping;
  DomTree simplified_tree;
  std::size_t n_blocks = 0;
  std::size_t simplified_token_count = 0;
  std::string item_attribute_name = "item-id";
};

namespace detail {

inline bool is_structural_block(std::string_view tag) {
  return in_list(tag, {"html",    "body",    "main", "li",     "dt",     "dd",       "td",     "th",
                       "tr",      "tbody",   "thead", "tfoot", "caption", "figcaption", "address", "details",
                       "summary", "center",  "fieldset", "header", "footer", "nav",   "aside", "form",
                       "dialog",  "menu",    "hgroup", "legend", "noscript", "hr"});
}

inline bool is_atomic_block(std::string_view tag) {
  return is_heading(tag) || in_list(tag, {"p", "pre", "table", "ul", "ol", "dl"});
}

inline bool is_skipped_subtree(std::string_view tag) {
  return in_list(tag, {"head", "title", "template", "script", "style"});
}

inline bool is_table_part(std::string_view tag) {
  return in_list(tag, {"tr", "td", "th", "tbody", "thead", "tfoot", "caption", "colgroup", "col"});
}

// Text codepoints after whitespace normalization.
inline std::size_t visible_length(const DomTree& tree, std::span<const NodeHandle> nodes) {
  return codepoint_count(normalize_whitespace(text_content(tree, nodes)));
}

class Chunker {
 public:
  Chunker(const DomTree& tree, const SimplifyConfig& config)
      : tree_(tree), config_(config), block_below_(tree.arena_size(), kUnknown) {}

  std::vector<std::vector<NodeHandle>> run() {
    NodeHandle start = tree_.find_first("body");
    if (!start.valid()) start = tree_.root();
    container(start);
    flush();
    return std::move(groups_);
  }

 private:
  static constexpr signed char kUnknown = -1;

  bool is_block(std::string_view tag) const {
    return config_.block_level_tags.contains(tag) || is_structural_block(tag);
  }

  // Memoized: does any descendant element (excluding `h`) count as block-level?
  bool has_block_descendant(NodeHandle h) {
    signed char& memo = block_below_[h.index()];
    if (memo != kUnknown) return memo == 1;
    bool found = false;
    for (NodeHandle c : tree_.children(h)) {
      if (!tree_.is_element(c) || is_skipped_subtree(tree_.tag(c))) continue;
      if (is_block(tree_.tag(c)) || has_block_descendant(c)) {
        found = true;
        break;
      }
    }
    memo = found ? 1 : 0;
    return found;
  }

  bool is_layout_table(NodeHandle table) const {
    bool split = false;
    const std::size_t cell_limit = 2 * config_.paragraph_truncation_chars;
    tree_.visit(table, [&](NodeHandle n) {
      if (split) return false;
      if (n == table) return true;
      if (!tree_.is_element(n)) return false;
      const std::string& tag = tree_.tag(n);
      if (config_.block_level_tags.contains(tag) && !is_table_part(tag)) {
        split = true;
        return false;
      }
      if ((tag == "td" || tag == "th") && visible_length(tree_, std::span(&n, 1)) > cell_limit) {
        split = true;
        return false;
      }
      return true;
    });
    return split;
  }

  void emit(std::vector<NodeHandle> group) {
    if (!group.empty() && has_visible_text(text_content(tree_, group))) groups_.push_back(std::move(group));
  }

  void flush() {
    std::size_t begin = 0;
    std::size_t end = run_.size();
    auto blank = [&](NodeHandle h) { return tree_.is_text(h) && !has_visible_text(tree_.text(h)); };
    while (begin < end && blank(run_[begin])) ++begin;
    while (end > begin && blank(run_[end - 1])) --end;
    emit(std::vector<NodeHandle>(run_.begin() + static_cast<std::ptrdiff_t>(begin),
                                 run_.begin() + static_cast<std::ptrdiff_t>(end)));
    run_.clear();
  }

  void container(NodeHandle h) {
    for (NodeHandle c : tree_.children(h)) child(c);
  }

  void child(NodeHandle c) {
    switch (tree_.kind(c)) {
      case NodeKind::Text:
        run_.push_back(c);
        return;
      case NodeKind::Element:
        break;
      default:
        return;
    }
    const std::string& tag = tree_.tag(c);
    if (is_skipped_subtree(tag)) return;
    if (tag == "br") {
      flush();
      return;
    }
    if (is_block(tag)) {
      flush();
      block_element(c);
      return;
    }
    if (has_block_descendant(c)) {
      // An inline wrapper around block content: descend instead of
      // swallowing the whole region into one run.
      flush();
      container(c);
      flush();
      return;
    }
    run_.push_back(c);
  }

  void block_element(NodeHandle c) {
    const std::string& tag = tree_.tag(c);
    if (tag == "table" && is_layout_table(c)) {
      split_table(c);
      return;
    }
    if (is_atomic_block(tag) || !has_block_descendant(c)) {
      emit({c});
      return;
    }
    container(c);
    flush();
  }

  void split_table(NodeHandle h) {
    for (NodeHandle c : tree_.children(h)) {
      if (!tree_.is_element(c)) {
        child(c);
        continue;
      }
      const std::string& tag = tree_.tag(c);
      if (tag == "tbody" || tag == "thead" || tag == "tfoot" || tag == "tr") {
        flush();
        split_table(c);
      } else if (tag == "td" || tag == "th" || tag == "caption") {
        flush();
        block_element(c);
      } else {
        child(c);
      }
    }
    flush();
  }

  const DomTree& tree_;
  const SimplifyConfig& config_;
  std::vector<signed char> block_below_;
  std::vector<NodeHandle> run_;
  std::vector<std::vector<NodeHandle>> groups_;
};

// Cuts the text below `h` to `budget` codepoints, removing everything after
// the cut point. Returns true when anything was removed.
inline bool cut_text(DomTree& tree, NodeHandle h, std::size_t& budget) {
  bool cut = false;
  const std::vector<NodeHandle> kids(tree.children(h).begin(), tree.children(h).end());
  for (NodeHandle c : kids) {
    if (budget == 0) {
      if (tree.is_text(c) && !has_visible_text(tree.text(c))) {
        tree.remove(c);
        continue;
      }
      tree.remove(c);
      cut = true;
      continue;
    }
    if (tree.is_text(c)) {
      std::string& text = tree.mutable_text(c);
      const std::size_t n = codepoint_count(text);
      if (n > budget) {
        text.resize(byte_offset_of(text, budget));
        budget = 0;
        cut = true;
      } else {
        budget -= n;
      }
    } else if (tree.is_element(c)) {
      cut = cut_text(tree, c, budget) || cut;
    }
  }
  return cut;
}

inline bool truncate_paragraph(DomTree& tree, NodeHandle h, std::size_t limit) {
  std::size_t budget = limit;
  return cut_text(tree, h, budget);
}

inline void collect_elements(const DomTree& tree, NodeHandle h, std::initializer_list<std::string_view> names,
                             std::vector<NodeHandle>& out) {
  tree.visit(h, [&](NodeHandle n) {
    if (n != h && tree.is_element(n) && in_list(tree.tag(n), names)) {
      out.push_back(n);
      return false;
    }
    return true;
  });
}

inline bool truncate_table(DomTree& tree, NodeHandle table, const SimplifyConfig& config) {
  std::vector<NodeHandle> cells;
  collect_elements(tree, table, {"td", "th"}, cells);
  bool cut = false;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i < config.table_cell_keep) {
      cut = truncate_paragraph(tree, cells[i], config.paragraph_truncation_chars) || cut;
    } else {
      tree.remove(cells[i]);
      cut = true;
    }
  }
  if (cut) {
    std::vector<NodeHandle> rows;
    collect_elements(tree, table, {"tr"}, rows);
    for (NodeHandle row : rows) {
      bool has_cell = false;
      for (NodeHandle c : tree.children(row)) has_cell = has_cell || tree.is_element(c);
      if (!has_cell) tree.remove(row);
    }
  }
  std::vector<NodeHandle> captions;
  collect_elements(tree, table, {"caption"}, captions);
  for (NodeHandle c : captions) cut = truncate_paragraph(tree, c, config.paragraph_truncation_chars) || cut;
  return cut;
}

inline bool truncate_list(DomTree& tree, NodeHandle list, const SimplifyConfig& config) {
  const bool definition = tree.tag(list) == "dl";
  std::size_t kept = 0;
  bool cut = false;
  const std::vector<NodeHandle> kids(tree.children(list).begin(), tree.children(list).end());
  for (NodeHandle c : kids) {
    const bool item = tree.is_element(c) && (definition ? in_list(tree.tag(c), {"dt", "dd"}) : tree.tag(c) == "li");
    if (kept >= config.list_item_keep) {
      if (item || has_visible_text(text_content(tree, c))) cut = true;
      tree.remove(c);
      continue;
    }
    if (item) {
      ++kept;
      cut = truncate_paragraph(tree, c, config.paragraph_truncation_chars) || cut;
    }
  }
  return cut;
}

}  // namespace detail

/// Truncates the block rooted at `h` in place: tables keep their first cells,
/// lists their first items, everything else its leading characters.
inline bool truncate_subtree(DomTree& tree, NodeHandle h, const SimplifyConfig& config) {
  if (tree.is_element(h, "table")) return detail::truncate_table(tree, h, config);
  if (tree.is_element(h) && detail::in_list(tree.tag(h), {"ul", "ol", "dl"})) {
    return detail::truncate_list(tree, h, config);
  }
  return detail::truncate_paragraph(tree, h, config.paragraph_truncation_chars);
}

struct TruncatedBlock {
  std::string html;
  bool truncated = false;
};

/// String form of truncate_subtree for one simplified block.
inline TruncatedBlock truncate_block(std::string_view block_html, const SimplifyConfig& config) {
  DomTree tree = parse_html_text(block_html);
  NodeHandle target = tree.root();
  NodeHandle only_element;
  std::size_t elements = 0;
  bool loose_text = false;
  for (NodeHandle c : tree.children(tree.root())) {
    if (tree.is_element(c)) {
      ++elements;
      only_element = c;
    } else if (tree.is_text(c) && detail::has_visible_text(tree.text(c))) {
      loose_text = true;
    }
  }
  if (elements == 1 && !loose_text) target = only_element;
  const bool cut = truncate_subtree(tree, target, config);
  return {serialize(tree), cut};
}

/// Deletes removed_tags subtrees, comments and doctype nodes.
inline DomTree strip_non_content(DomTree tree, const SimplifyConfig& config) {
  std::vector<NodeHandle> doomed;
  tree.visit(tree.root(), [&](NodeHandle h) {
    switch (tree.kind(h)) {
      case NodeKind::Comment:
      case NodeKind::Doctype:
        doomed.push_back(h);
        return false;
      case NodeKind::Element:
        if (config.removed_tags.contains(tree.tag(h))) {
          doomed.push_back(h);
          return false;
        }
        return true;
      default:
        return true;
    }
  });
  for (NodeHandle h : doomed) tree.remove(h);
  return tree;
}

inline void simplify_attributes_in_place(DomTree& tree, NodeHandle from, const SimplifyConfig& config) {
  tree.visit(from, [&](NodeHandle h) {
    if (tree.is_element(h)) {
      auto& attrs = tree.mutable_attributes(h);
      std::erase_if(attrs, [&](const Attribute& a) { return !config.kept_attributes.contains(a.name); });
    }
    return true;
  });
}

/// Keeps only attributes named in kept_attributes, values untouched.
inline DomTree simplify_attributes(DomTree tree, const SimplifyConfig& config) {
  simplify_attributes_in_place(tree, tree.root(), config);
  return tree;
}

/// Segments the document into block node groups in document order.
/// Throws EmptyDocument when no block has visible text.
inline std::vector<std::vector<NodeHandle>> chunk_blocks(const DomTree& tree, const SimplifyConfig& config) {
  auto groups = detail::Chunker(tree, config).run();
  if (groups.empty()) throw Error(ErrorCode::EmptyDocument, "no block contains visible text");
  return groups;
}

namespace detail {

inline std::size_t link_text_length(const DomTree& tree, std::span<const NodeHandle> nodes) {
  std::string links;
  for (NodeHandle n : nodes) {
    tree.visit(n, [&](NodeHandle h) {
      if (tree.is_element(h, "a")) {
        links += ' ';
        append_text_content(tree, h, links);
        return false;
      }
      return tree.is_element(h);
    });
  }
  return codepoint_count(normalize_whitespace(links));
}

inline void collapse_text_in_place(DomTree& tree, NodeHandle h) {
  tree.visit(h, [&](NodeHandle n) {
    if (tree.is_text(n)) {
      std::string& text = tree.mutable_text(n);
      text = collapse_ascii_whitespace(text);
    }
    return true;
  });
}

// Drops every node that is neither a block marker, inside one, nor an
// ancestor of one.
inline void prune_to_skeleton(DomTree& tree, const std::vector<NodeHandle>& markers) {
  std::vector<char> role(tree.arena_size(), 0);  // 1 = ancestor, 2 = marker
  for (NodeHandle m : markers) {
    role[m.index()] = 2;
    for (NodeHandle p = tree.parent(m); p.valid() && role[p.index()] == 0; p = tree.parent(p)) role[p.index()] = 1;
  }
  std::vector<NodeHandle> stack{tree.root()};
  std::vector<NodeHandle> doomed;
  while (!stack.empty()) {
    const NodeHandle h = stack.back();
    stack.pop_back();
    for (NodeHandle c : tree.children(h)) {
      const char r = c.index() < role.size() ? role[c.index()] : 0;
      if (r == 1) stack.push_back(c);
      else if (r == 0) doomed.push_back(c);
    }
  }
  for (NodeHandle h : doomed) tree.remove(h);
}

}  // namespace detail

/// Parses raw bytes and produces the aligned Simplified / Mapping pair.
inline DocumentPair build_document_pair(std::string_view raw_html, const SimplifyConfig& config = {},
                                        const Tokenizer& tokenizer = default_tokenizer(),
                                        std::optional<std::string_view> encoding_hint = {}) {
  DomTree raw = parse_html(raw_html, encoding_hint);
  DomTree simplified = simplify_attributes(strip_non_content(raw, config), config);
  const auto groups = chunk_blocks(simplified, config);

  DocumentPair pair;
  pair.n_blocks = groups.size();
  pair.item_attribute_name = config.item_attribute_name;
  pair.blocks.reserve(groups.size());
  std::vector<NodeHandle> markers;
  markers.reserve(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto& group = groups[i];
    Block block;
    block.id = i + 1;
    block.mapping_nodes = group;
    block.text = detail::normalize_whitespace(text_content(simplified, group));
    block.char_count = detail::codepoint_count(block.text);
    block.link_char_count = detail::link_text_length(simplified, group);
    const std::string id = std::to_string(block.id);
    NodeHandle marker;
    if (group.size() == 1 && simplified.is_element(group[0])) {
      marker = group[0];
      block.tag = simplified.tag(marker);
      simplified.set_attribute(marker, config.item_attribute_name, id);
    } else {
      marker = simplified.wrap(group, "span", {{config.item_attribute_name, id}});
      block.tag = "inline";
      block.wrapped = true;
    }
    block.simplified_node = marker;
    detail::collapse_text_in_place(simplified, marker);
    block.truncated = truncate_subtree(simplified, marker, config);
    block.simplified_html = serialize(simplified, marker);
    markers.push_back(marker);
    pair.blocks.push_back(std::move(block));
  }
  detail::prune_to_skeleton(simplified, markers);
  pair.simplified = serialize(simplified);
  pair.simplified_token_count = tokenizer.count(pair.simplified);
  pair.simplified_tree = std::move(simplified);
  pair.mapping = std::move(raw);
  return pair;
}

/// The simplified rendering without the item id markup: id attributes are
/// dropped and span wrappers around inline runs are unwrapped.
inline std::string render_without_ids(const DocumentPair& pair, const SimplifyConfig& config = {}) {
  DomTree tree = pair.simplified_tree;
  std::vector<NodeHandle> wrappers;
  for (const Block& b : pair.blocks) {
    std::erase_if(tree.mutable_attributes(b.simplified_node),
                  [&](const Attribute& a) { return a.name == config.item_attribute_name; });
    if (b.wrapped) wrappers.push_back(b.simplified_node);
  }
  for (NodeHandle w : wrappers) {
    const NodeHandle parent = tree.parent(w);
    const std::vector<NodeHandle> kids(tree.children(w).begin(), tree.children(w).end());
    for (NodeHandle k : kids) tree.insert_before(parent, k, w);
    tree.remove(w);
  }
  return serialize(tree);
}

}  // namespace dripper
