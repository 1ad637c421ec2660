#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dripper/error.hpp"

namespace dripper {

enum class NodeKind : std::uint8_t { Document, Element, Text, Comment, Doctype };

/// Opaque index into a DomTree's node arena. Handles are never reused, so a
/// handle stays meaningful after unrelated subtrees are removed, and a copy of
/// a tree shares handle values with its source.
class NodeHandle {
 public:
  constexpr NodeHandle() = default;
  constexpr explicit NodeHandle(std::uint32_t index) : index_(index) {}

  [[nodiscard]] constexpr std::uint32_t index() const { return index_; }
  [[nodiscard]] constexpr bool valid() const { return index_ != kInvalid; }

  friend constexpr bool operator==(NodeHandle, NodeHandle) = default;
  friend constexpr auto operator<=>(NodeHandle, NodeHandle) = default;

 private:
  static constexpr std::uint32_t kInvalid = 0xFFFFFFFFu;
  std::uint32_t index_ = kInvalid;
};

struct Attribute {
  std::string name;
  std::string value;

  friend bool operator==(const Attribute&, const Attribute&) = default;
};

struct Node {
  NodeKind kind = NodeKind::Element;
  std::string name;  // tag name (lower case) or doctype name
  std::vector<Attribute> attributes;
  std::string text;  // payload of Text and Comment nodes
  NodeHandle parent;
  std::vector<NodeHandle> children;
};

class DomTree {
 public:
  DomTree() {
    nodes_.push_back(Node{NodeKind::Document, "#document", {}, {}, {}, {}});
  }

  [[nodiscard]] NodeHandle root() const { return NodeHandle{0}; }
  [[nodiscard]] std::size_t arena_size() const { return nodes_.size(); }

  [[nodiscard]] const Node& node(NodeHandle h) const { return nodes_.at(checked(h)); }

  [[nodiscard]] NodeKind kind(NodeHandle h) const { return node(h).kind; }
  [[nodiscard]] const std::string& tag(NodeHandle h) const { return node(h).name; }
  [[nodiscard]] const std::string& text(NodeHandle h) const { return node(h).text; }
  [[nodiscard]] NodeHandle parent(NodeHandle h) const { return node(h).parent; }
  [[nodiscard]] std::span<const NodeHandle> children(NodeHandle h) const { return node(h).children; }
  [[nodiscard]] const std::vector<Attribute>& attributes(NodeHandle h) const { return node(h).attributes; }

  [[nodiscard]] bool is_element(NodeHandle h) const { return kind(h) == NodeKind::Element; }
  [[nodiscard]] bool is_element(NodeHandle h, std::string_view name) const {
    const Node& n = node(h);
    return n.kind == NodeKind::Element && n.name == name;
  }
  [[nodiscard]] bool is_text(NodeHandle h) const { return kind(h) == NodeKind::Text; }

  /// True when `h` is still reachable from the root.
  [[nodiscard]] bool is_connected(NodeHandle h) const {
    if (!h.valid() || h.index() >= nodes_.size()) return false;
    while (h != root()) {
      h = nodes_[h.index()].parent;
      if (!h.valid()) return false;
    }
    return true;
  }

  [[nodiscard]] bool is_ancestor_of(NodeHandle ancestor, NodeHandle h) const {
    for (NodeHandle p = parent(h); p.valid(); p = parent(p)) {
      if (p == ancestor) return true;
    }
    return false;
  }

  NodeHandle create_element(std::string name, std::vector<Attribute> attributes = {}) {
    return push(Node{NodeKind::Element, std::move(name), std::move(attributes), {}, {}, {}});
  }
  NodeHandle create_text(std::string text) {
    return push(Node{NodeKind::Text, {}, {}, std::move(text), {}, {}});
  }
  NodeHandle create_comment(std::string text) {
    return push(Node{NodeKind::Comment, {}, {}, std::move(text), {}, {}});
  }
  NodeHandle create_doctype(std::string name) {
    return push(Node{NodeKind::Doctype, std::move(name), {}, {}, {}, {}});
  }

  void append_child(NodeHandle parent, NodeHandle child) {
    detach(child);
    mutable_node(parent).children.push_back(child);
    mutable_node(child).parent = parent;
  }

  /// Inserts `child` before `reference`, which must be a child of `parent`.
  void insert_before(NodeHandle parent, NodeHandle child, NodeHandle reference) {
    detach(child);
    auto& siblings = mutable_node(parent).children;
    auto it = std::find(siblings.begin(), siblings.end(), reference);
    if (it == siblings.end()) throw Error(ErrorCode::InvalidArgument, "reference is not a child of parent");
    siblings.insert(it, child);
    mutable_node(child).parent = parent;
  }

  /// Detaches the subtree rooted at `h`. Handles inside it remain valid but
  /// are no longer connected; handles elsewhere are unaffected.
  void remove(NodeHandle h) {
    if (h == root()) throw Error(ErrorCode::InvalidArgument, "cannot remove the document root");
    detach(h);
  }

  /// Moves the contiguous siblings `nodes` into a new element inserted at the
  /// position of the first one.
  NodeHandle wrap(std::span<const NodeHandle> nodes, std::string name, std::vector<Attribute> attributes = {}) {
    if (nodes.empty()) throw Error(ErrorCode::InvalidArgument, "nothing to wrap");
    const NodeHandle p = parent(nodes.front());
    const NodeHandle wrapper = create_element(std::move(name), std::move(attributes));
    insert_before(p, wrapper, nodes.front());
    for (NodeHandle n : nodes) append_child(wrapper, n);
    return wrapper;
  }

  [[nodiscard]] const std::string* attribute(NodeHandle h, std::string_view name) const {
    for (const Attribute& a : node(h).attributes) {
      if (a.name == name) return &a.value;
    }
    return nullptr;
  }
  void set_attribute(NodeHandle h, std::string_view name, std::string value) {
    for (Attribute& a : mutable_node(h).attributes) {
      if (a.name == name) {
        a.value = std::move(value);
        return;
      }
    }
    mutable_node(h).attributes.push_back({std::string(name), std::move(value)});
  }
  std::vector<Attribute>& mutable_attributes(NodeHandle h) { return mutable_node(h).attributes; }
  std::string& mutable_text(NodeHandle h) { return mutable_node(h).text; }

  /// Pre-order visit of `h` and its descendants. The visitor returns false to
  /// skip a node's children.
  template <typename Visitor>
  void visit(NodeHandle h, Visitor&& visitor) const {
    std::vector<NodeHandle> stack{h};
    while (!stack.empty()) {
      const NodeHandle current = stack.back();
      stack.pop_back();
      if (!visitor(current)) continue;
      const auto& kids = nodes_[current.index()].children;
      for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
    }
  }

  /// First element with the given tag in document order, or an invalid handle.
  [[nodiscard]] NodeHandle find_first(std::string_view name, NodeHandle from) const {
    NodeHandle found;
    visit(from, [&](NodeHandle h) {
      if (found.valid()) return false;
      if (is_element(h, name)) {
        found = h;
        return false;
      }
      return true;
    });
    return found;
  }
  [[nodiscard]] NodeHandle find_first(std::string_view name) const { return find_first(name, root()); }

 private:
  [[nodiscard]] std::size_t checked(NodeHandle h) const {
    if (!h.valid() || h.index() >= nodes_.size()) throw Error(ErrorCode::InvalidArgument, "node handle out of range");
    return h.index();
  }
  Node& mutable_node(NodeHandle h) { return nodes_.at(checked(h)); }

  NodeHandle push(Node n) {
    nodes_.push_back(std::move(n));
    return NodeHandle{static_cast<std::uint32_t>(nodes_.size() - 1)};
  }

  void detach(NodeHandle h) {
    Node& n = mutable_node(h);
    if (!n.parent.valid()) return;
    auto& siblings = mutable_node(n.parent).children;
    siblings.erase(std::remove(siblings.begin(), siblings.end(), h), siblings.end());
    n.parent = NodeHandle{};
  }

  std::vector<Node> nodes_;
};

namespace html {

inline bool is_void_element(std::string_view tag) {
  static constexpr std::string_view kVoid[] = {"area", "base", "br",   "col",   "embed", "hr",    "img",
                                               "input", "link", "meta", "param", "source", "track", "wbr"};
  return std::find(std::begin(kVoid), std::end(kVoid), tag) != std::end(kVoid);
}

// Elements whose content is raw text: no markup and no character references.
inline bool is_raw_text_element(std::string_view tag) {
  return tag == "script" || tag == "style" || tag == "xmp" || tag == "iframe" || tag == "noembed" ||
         tag == "noframes";
}

// Elements whose content is text with character references but no markup.
inline bool is_rcdata_element(std::string_view tag) { return tag == "title" || tag == "textarea"; }

inline void escape_text(std::string_view s, std::string& out) {
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out.push_back(c);
    }
  }
}

inline void escape_attribute(std::string_view s, std::string& out) {
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out.push_back(c);
    }
  }
}

}  // namespace html

inline void serialize_into(const DomTree& tree, NodeHandle h, std::string& out) {
  const Node& n = tree.node(h);
  switch (n.kind) {
    case NodeKind::Document:
      for (NodeHandle c : n.children) serialize_into(tree, c, out);
      return;
    case NodeKind::Text: {
      const NodeHandle p = n.parent;
      if (p.valid() && tree.is_element(p) && html::is_raw_text_element(tree.tag(p))) {
        out += n.text;
      } else {
        html::escape_text(n.text, out);
      }
      return;
    }
    case NodeKind::Comment:
      out += "<!--";
      out += n.text;
      out += "-->";
      return;
    case NodeKind::Doctype:
      out += "<!DOCTYPE ";
      out += n.name.empty() ? "html" : n.name;
      out += ">";
      return;
    case NodeKind::Element:
      out.push_back('<');
      out += n.name;
      for (const Attribute& a : n.attributes) {
        out.push_back(' ');
        out += a.name;
        out += "=\"";
        html::escape_attribute(a.value, out);
        out.push_back('"');
      }
      out.push_back('>');
      if (html::is_void_element(n.name)) return;
      for (NodeHandle c : n.children) serialize_into(tree, c, out);
      out += "</";
      out += n.name;
      out.push_back('>');
      return;
  }
}

/// HTML text of the subtree rooted at `h` (for the document node, the
/// concatenation of its children).
inline std::string serialize(const DomTree& tree, NodeHandle h) {
  std::string out;
  serialize_into(tree, h, out);
  return out;
}

inline std::string serialize(const DomTree& tree) { return serialize(tree, tree.root()); }

/// Whether an element's payload is never rendered as text.
inline bool is_non_text_element(std::string_view tag) { return tag == "script" || tag == "style"; }

inline void append_text_content(const DomTree& tree, NodeHandle h, std::string& out) {
  tree.visit(h, [&](NodeHandle n) {
    const Node& node = tree.node(n);
    if (node.kind == NodeKind::Text) {
      out += node.text;
      return false;
    }
    if (node.kind == NodeKind::Element && is_non_text_element(node.name)) return false;
    return node.kind == NodeKind::Element || node.kind == NodeKind::Document;
  });
}

/// Concatenated descendant text in document order, excluding script and style
/// payloads.
inline std::string text_content(const DomTree& tree, NodeHandle h) {
  std::string out;
  append_text_content(tree, h, out);
  return out;
}

inline std::string text_content(const DomTree& tree, std::span<const NodeHandle> nodes) {
  std::string out;
  for (NodeHandle h : nodes) append_text_content(tree, h, out);
  return out;
}

}  // namespace dripper
