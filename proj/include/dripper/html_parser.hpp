#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dripper/detail/entities.hpp"
#include "dripper/detail/utf8.hpp"
#include "dripper/dom.hpp"
#include "dripper/encoding.hpp"
#include "dripper/error.hpp"

namespace dripper {

namespace detail {

inline bool in_list(std::string_view name, std::initializer_list<std::string_view> names) {
  return std::find(names.begin(), names.end(), name) != names.end();
}

inline bool is_heading(std::string_view name) {
  return name.size() == 2 && name[0] == 'h' && name[1] >= '1' && name[1] <= '6';
}

// Start tags that implicitly close an open <p>.
inline bool closes_paragraph(std::string_view name) {
  return is_heading(name) ||
         in_list(name, {"address", "article", "aside", "blockquote", "center", "details", "dialog", "dir", "div",
                        "dl", "fieldset", "figcaption", "figure", "footer", "form", "header", "hgroup", "hr",
                        "main", "menu", "nav", "ol", "p", "pre", "section", "summary", "table", "ul", "li", "dd",
                        "dt", "listing", "xmp", "plaintext", "search"});
}

// Elements that stop the search for an open <li>, <dd> or <dt>.
inline bool is_special(std::string_view name) {
  return is_heading(name) ||
         in_list(name, {"applet", "area", "article", "aside", "base", "blockquote", "body", "br", "button",
                        "caption", "center", "col", "colgroup", "dd", "details", "dir", "dl", "dt", "embed",
                        "fieldset", "figcaption", "figure", "footer", "form", "frame", "frameset", "head",
                        "header", "hgroup", "hr", "html", "iframe", "img", "input", "li", "link", "listing",
                        "main", "marquee", "menu", "meta", "nav", "noembed", "noframes", "noscript", "object",
                        "ol", "param", "plaintext", "pre", "script", "section", "select", "source", "style",
                        "summary", "table", "tbody", "td", "template", "textarea", "tfoot", "th", "thead",
                        "title", "tr", "track", "ul", "wbr", "xmp"});
}

class TreeBuilder {
 public:
  explicit TreeBuilder(DomTree& tree) : tree_(tree) { open_.push_back(tree.root()); }

  void start_tag(std::string name, std::vector<Attribute> attributes, bool self_closing) {
    if (name == "html" || name == "body" || name == "head") {
      if (NodeHandle existing = singleton(name); existing.valid()) {
        merge_attributes(existing, std::move(attributes));
        return;
      }
    }
    if (!in_foreign_content()) apply_implied_end_tags(name);

    const NodeHandle element = tree_.create_element(name, std::move(attributes));
    tree_.append_child(current(), element);
    if (name == "html") html_ = element;
    if (name == "body") body_ = element;
    if (name == "head") head_ = element;

    const bool foreign = in_foreign_content() || name == "svg" || name == "math";
    if (html::is_void_element(name) || (self_closing && foreign)) return;
    open_.push_back(element);
  }

  void end_tag(std::string_view name) {
    if (name == "html" || name == "body") return;  // later content still belongs to the body
    if (name == "p" && !has_in_scope("p", kButtonScope)) return;
    const bool table_part = in_list(name, {"td", "th", "tr", "tbody", "thead", "tfoot", "caption"});
    for (std::size_t i = open_.size(); i-- > 1;) {
      const std::string& tag = tree_.tag(open_[i]);
      if (tag == name) {
        open_.resize(i);
        return;
      }
      if (tag == "html" || tag == "template") return;
      if (name == "table") continue;
      if (tag == "table") return;
      if (!table_part && in_list(tag, {"td", "th", "caption"})) return;
    }
  }

  void text(std::string_view s) {
    if (s.empty()) return;
    const NodeHandle parent = current();
    const auto kids = tree_.children(parent);
    if (!kids.empty() && tree_.is_text(kids.back())) {
      tree_.mutable_text(kids.back()).append(s);
      return;
    }
    tree_.append_child(parent, tree_.create_text(std::string(s)));
  }

  void comment(std::string s) { tree_.append_child(current(), tree_.create_comment(std::move(s))); }
  void doctype(std::string s) { tree_.append_child(current(), tree_.create_doctype(std::move(s))); }

  // Raw text and RCDATA elements are fully consumed by the tokenizer; the
  // element is created with its single text child and never left open.
  void raw_text_element(std::string name, std::vector<Attribute> attributes, std::string content) {
    if (!in_foreign_content()) apply_implied_end_tags(name);
    const NodeHandle element = tree_.create_element(std::move(name), std::move(attributes));
    tree_.append_child(current(), element);
    if (!content.empty()) tree_.append_child(element, tree_.create_text(std::move(content)));
  }

 private:
  enum class Scope { Default, Button, ListItem, Table };
  static constexpr Scope kButtonScope = Scope::Button;

  [[nodiscard]] NodeHandle current() const { return open_.back(); }

  NodeHandle singleton(std::string_view name) const {
    if (name == "html") return html_;
    if (name == "body") return body_;
    return head_;
  }

  void merge_attributes(NodeHandle element, std::vector<Attribute> attributes) {
    for (Attribute& a : attributes) {
      if (tree_.attribute(element, a.name) == nullptr) tree_.set_attribute(element, a.name, std::move(a.value));
    }
  }

  [[nodiscard]] bool in_foreign_content() const {
    for (std::size_t i = open_.size(); i-- > 1;) {
      const std::string& tag = tree_.tag(open_[i]);
      if (tag == "svg" || tag == "math") return true;
    }
    return false;
  }

  static bool is_scope_boundary(std::string_view tag, Scope scope) {
    if (scope == Scope::Table) return tag == "html" || tag == "table" || tag == "template";
    const bool base = in_list(tag, {"applet", "caption", "html", "table", "td", "th", "marquee", "object",
                                    "template", "svg", "math"});
    if (base) return true;
    if (scope == Scope::Button) return tag == "button";
    if (scope == Scope::ListItem) return tag == "ol" || tag == "ul";
    return false;
  }

  [[nodiscard]] bool has_in_scope(std::string_view name, Scope scope) const {
    for (std::size_t i = open_.size(); i-- > 1;) {
      const std::string& tag = tree_.tag(open_[i]);
      if (tag == name) return true;
      if (is_scope_boundary(tag, scope)) return false;
    }
    return false;
  }

  void pop_until(std::string_view name) {
    while (open_.size() > 1) {
      const bool match = tree_.tag(open_.back()) == name;
      open_.pop_back();
      if (match) return;
    }
  }

  void close_in_scope(std::string_view name, Scope scope) {
    if (has_in_scope(name, scope)) pop_until(name);
  }

  // Closes an open list item (li, or dd/dt) unless a special element other
  // than address/div/p intervenes.
  void close_list_item(std::initializer_list<std::string_view> items) {
    for (std::size_t i = open_.size(); i-- > 1;) {
      const std::string& tag = tree_.tag(open_[i]);
      if (in_list(tag, items)) {
        open_.resize(i);
        return;
      }
      if (is_special(tag) && tag != "address" && tag != "div" && tag != "p") return;
    }
  }

  void apply_implied_end_tags(std::string_view name) {
    if (closes_paragraph(name)) close_in_scope("p", Scope::Button);
    if (name == "li") {
      close_list_item({"li"});
    } else if (name == "dd" || name == "dt") {
      close_list_item({"dd", "dt"});
    } else if (is_heading(name)) {
      if (open_.size() > 1 && is_heading(tree_.tag(current()))) open_.pop_back();
    } else if (name == "td" || name == "th") {
      close_in_scope("td", Scope::Table);
      close_in_scope("th", Scope::Table);
    } else if (name == "tr") {
      close_in_scope("td", Scope::Table);
      close_in_scope("th", Scope::Table);
      close_in_scope("tr", Scope::Table);
    } else if (name == "thead" || name == "tbody" || name == "tfoot") {
      for (std::string_view t : {"td", "th", "tr", "thead", "tbody", "tfoot"}) close_in_scope(t, Scope::Table);
    } else if (name == "option") {
      if (open_.size() > 1 && tree_.tag(current()) == "option") open_.pop_back();
    } else if (name == "optgroup") {
      if (open_.size() > 1 && tree_.tag(current()) == "option") open_.pop_back();
      if (open_.size() > 1 && tree_.tag(current()) == "optgroup") open_.pop_back();
    } else if (name == "a") {
      close_in_scope("a", Scope::Default);
    } else if (name == "button") {
      close_in_scope("button", Scope::Default);
    }
  }

  DomTree& tree_;
  std::vector<NodeHandle> open_;
  NodeHandle html_;
  NodeHandle body_;
  NodeHandle head_;
};

inline bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

inline bool is_tag_terminator(char c) { return is_ascii_space(c) || c == '/' || c == '>'; }

inline bool starts_with_ci(std::string_view s, std::size_t pos, std::string_view prefix) {
  if (pos + prefix.size() > s.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    char c = s[pos + i];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c != prefix[i]) return false;
  }
  return true;
}

class HtmlTokenizer {
 public:
  HtmlTokenizer(std::string_view input, TreeBuilder& builder) : s_(input), builder_(builder) {}

  void run() {
    std::size_t i = 0;
    while (i < s_.size()) {
      const std::size_t lt = s_.find('<', i);
      if (lt == std::string_view::npos) {
        emit_text(s_.substr(i));
        return;
      }
      emit_text(s_.substr(i, lt - i));
      i = markup(lt);
    }
  }

 private:
  void emit_text(std::string_view raw) {
    if (raw.empty()) return;
    if (raw.find('&') == std::string_view::npos) {
      builder_.text(raw);
    } else {
      builder_.text(decode_entities(raw));
    }
  }

  // Consumes the construct starting at '<' and returns the next position.
  std::size_t markup(std::size_t lt) {
    const std::size_t n = s_.size();
    if (s_.compare(lt, 4, "<!--") == 0) {
      const std::size_t end = s_.find("-->", lt + 4);
      if (end == std::string_view::npos) {
        builder_.comment(std::string(s_.substr(lt + 4)));
        return n;
      }
      builder_.comment(std::string(s_.substr(lt + 4, end - lt - 4)));
      return end + 3;
    }
    if (lt + 1 < n && (s_[lt + 1] == '!' || s_[lt + 1] == '?')) {
      const std::size_t gt = s_.find('>', lt + 2);
      const std::size_t end = gt == std::string_view::npos ? n : gt;
      if (starts_with_ci(s_, lt + 2, "doctype")) {
        builder_.doctype(std::string(trim_ascii(s_.substr(lt + 9, end > lt + 9 ? end - lt - 9 : 0))));
      } else if (s_.compare(lt + 2, 7, "[CDATA[") == 0) {
        const std::size_t close = s_.find("]]>", lt + 9);
        if (close == std::string_view::npos) {
          builder_.comment(std::string(s_.substr(lt + 2)));
          return n;
        }
        builder_.comment(std::string(s_.substr(lt + 2, close + 2 - lt - 2)));
        return close + 3;
      } else {
        builder_.comment(std::string(s_.substr(lt + 2, end - lt - 2)));
      }
      return gt == std::string_view::npos ? n : gt + 1;
    }
    if (lt + 1 < n && s_[lt + 1] == '/') {
      if (lt + 2 < n && is_ascii_alpha(s_[lt + 2])) {
        std::size_t j = lt + 2;
        while (j < n && !is_tag_terminator(s_[j])) ++j;
        const std::string name = ascii_lower(s_.substr(lt + 2, j - lt - 2));
        const std::size_t gt = s_.find('>', j);
        builder_.end_tag(name);
        return gt == std::string_view::npos ? n : gt + 1;
      }
      const std::size_t gt = s_.find('>', lt + 2);
      if (lt + 2 < n && s_[lt + 2] == '>') return lt + 3;
      builder_.comment(std::string(s_.substr(lt + 2, (gt == std::string_view::npos ? n : gt) - lt - 2)));
      return gt == std::string_view::npos ? n : gt + 1;
    }
    if (lt + 1 < n && is_ascii_alpha(s_[lt + 1])) return start_tag(lt);
    builder_.text("<");
    return lt + 1;
  }

  std::size_t start_tag(std::size_t lt) {
    const std::size_t n = s_.size();
    std::size_t j = lt + 1;
    while (j < n && !is_tag_terminator(s_[j])) ++j;
    std::string name = ascii_lower(s_.substr(lt + 1, j - lt - 1));
    std::vector<Attribute> attributes;
    bool self_closing = false;
    bool closed = false;
    while (j < n) {
      while (j < n && is_ascii_space(s_[j])) ++j;
      if (j >= n) break;
      if (s_[j] == '>') {
        ++j;
        closed = true;
        break;
      }
      if (s_[j] == '/') {
        ++j;
        if (j < n && s_[j] == '>') {
          self_closing = true;
          ++j;
          closed = true;
          break;
        }
        continue;
      }
      const std::size_t name_begin = j;
      ++j;  // the first character may be '='
      while (j < n && !is_ascii_space(s_[j]) && s_[j] != '/' && s_[j] != '>' && s_[j] != '=') ++j;
      std::string attr_name = ascii_lower(s_.substr(name_begin, j - name_begin));
      std::size_t k = j;
      while (k < n && is_ascii_space(s_[k])) ++k;
      std::string value;
      if (k < n && s_[k] == '=') {
        ++k;
        while (k < n && is_ascii_space(s_[k])) ++k;
        if (k < n && (s_[k] == '"' || s_[k] == '\'')) {
          const char quote = s_[k];
          const std::size_t close = s_.find(quote, k + 1);
          const std::size_t end = close == std::string_view::npos ? n : close;
          value = decode_entities(s_.substr(k + 1, end - k - 1));
          j = close == std::string_view::npos ? n : close + 1;
        } else {
          std::size_t e = k;
          while (e < n && !is_ascii_space(s_[e]) && s_[e] != '>') ++e;
          value = decode_entities(s_.substr(k, e - k));
          j = e;
        }
      }
      const bool duplicate = std::any_of(attributes.begin(), attributes.end(),
                                         [&](const Attribute& a) { return a.name == attr_name; });
      if (!duplicate) attributes.push_back({std::move(attr_name), std::move(value)});
    }
    if (!closed) return n;  // a tag cut off by end of input is dropped

    if (html::is_raw_text_element(name) || html::is_rcdata_element(name)) {
      const std::size_t end = find_end_tag(j, name);
      std::string content(s_.substr(j, end - j));
      if (html::is_rcdata_element(name)) content = decode_entities(content);
      builder_.raw_text_element(name, std::move(attributes), std::move(content));
      if (end >= n) return n;
      const std::size_t gt = s_.find('>', end);
      return gt == std::string_view::npos ? n : gt + 1;
    }
    builder_.start_tag(std::move(name), std::move(attributes), self_closing);
    return j;
  }

  // Position of the matching "</name" (case-insensitive) or end of input.
  std::size_t find_end_tag(std::size_t from, std::string_view name) const {
    std::size_t pos = from;
    while (true) {
      pos = s_.find("</", pos);
      if (pos == std::string_view::npos) return s_.size();
      if (starts_with_ci(s_, pos + 2, name) &&
          (pos + 2 + name.size() >= s_.size() || is_tag_terminator(s_[pos + 2 + name.size()]))) {
        return pos;
      }
      pos += 2;
    }
  }

  std::string_view s_;
  TreeBuilder& builder_;
};

}  // namespace detail

/// Builds a tree from already-decoded UTF-8 text. Malformed markup is
/// repaired (implied end tags, stray end tags ignored), never rejected.
inline DomTree parse_html_text(std::string_view utf8) {
  DomTree tree;
  detail::TreeBuilder builder(tree);
  detail::HtmlTokenizer tokenizer(utf8, builder);
  tokenizer.run();
  return tree;
}

/// Decodes `bytes` (see decode_document) and parses the result.
inline DomTree parse_html(std::string_view bytes, std::optional<std::string_view> encoding_hint = {}) {
  if (bytes.empty()) throw Error(ErrorCode::InvalidArgument, "empty input");
  const DecodedText decoded = decode_document(bytes, encoding_hint);
  return parse_html_text(decoded.utf8);
}

}  // namespace dripper
