#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "dripper/detail/utf8.hpp"
#include "dripper/dom.hpp"
#include "dripper/html_parser.hpp"

namespace dripper {

namespace detail::md {

// Hard line breaks survive whitespace collapsing as this private-use char.
inline constexpr std::string_view kBreak = "\xEE\x80\x80";  // U+E000

inline bool is_skipped(std::string_view tag) {
  return in_list(tag, {"script", "style", "head", "title", "template", "noscript", "meta", "link"});
}

inline bool is_block_tag(std::string_view tag) {
  return is_heading(tag) ||
         in_list(tag, {"p",      "div",     "ul",      "ol",      "dl",      "dt",       "dd",      "li",
                       "table",  "tr",      "td",      "th",      "thead",   "tbody",    "tfoot",   "caption",
                       "pre",    "blockquote", "hr",   "section", "article", "main",     "body",    "html",
                       "header", "footer",  "nav",     "aside",   "figure",  "figcaption", "address", "details",
                       "summary", "center", "form",    "fieldset", "legend", "menu",     "hgroup",  "dialog"});
}

// Collapses ASCII whitespace, trims, and turns break sentinels into newlines
// without leaving spaces at line edges.
inline std::string finish_inline(std::string_view raw) {
  const std::string collapsed = collapse_ascii_whitespace(raw);
  std::string out;
  std::size_t i = 0;
  std::string line;
  auto push_line = [&](bool last) {
    const std::string_view t = trim_ascii(line);
    out += t;
    if (!last) out += '\n';
    line.clear();
  };
  while (i < collapsed.size()) {
    if (collapsed.compare(i, kBreak.size(), kBreak) == 0) {
      push_line(false);
      i += kBreak.size();
    } else {
      line.push_back(collapsed[i]);
      ++i;
    }
  }
  push_line(true);
  // Blank lines carry no meaning inside a paragraph.
  std::string result;
  std::size_t start = 0;
  while (start <= out.size()) {
    const std::size_t nl = out.find('\n', start);
    const std::string_view l = std::string_view(out).substr(start, nl == std::string::npos ? std::string::npos : nl - start);
    if (!l.empty()) {
      if (!result.empty()) result += '\n';
      result += l;
    }
    if (nl == std::string::npos) break;
    start = nl + 1;
  }
  return result;
}

inline std::string indent_lines(std::string_view text, std::string_view first, std::string_view rest) {
  std::string out;
  bool first_line = true;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    const std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    if (!first_line) out += '\n';
    if (!line.empty()) {
      out += first_line ? first : rest;
      out += line;
    } else {
      out += trim_ascii(first_line ? first : rest);
    }
    first_line = false;
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return out;
}

inline std::string longest_backtick_run_fence(std::string_view text, std::size_t minimum) {
  std::size_t best = 0;
  std::size_t run = 0;
  for (char c : text) {
    run = c == '`' ? run + 1 : 0;
    best = std::max(best, run);
  }
  return std::string(std::max(minimum, best + 1), '`');
}

class Renderer {
 public:
  explicit Renderer(const DomTree& tree) : tree_(tree) {}

  std::string render(NodeHandle h) {
    std::vector<std::string> out;
    if (tree_.is_element(h) && is_block_tag(tree_.tag(h))) {
      block(h, out);
    } else {
      std::string buf;
      if (tree_.kind(h) == NodeKind::Document) {
        children_as_blocks(h, out);
      } else {
        inline_node(h, buf);
        push_paragraph(buf, out);
      }
    }
    return join(out, "\n\n");
  }

 private:
  static std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (const std::string& p : parts) {
      if (p.empty()) continue;
      if (!out.empty()) out += sep;
      out += p;
    }
    return out;
  }

  static void push_paragraph(std::string& buf, std::vector<std::string>& out) {
    std::string text = finish_inline(buf);
    buf.clear();
    if (!text.empty()) out.push_back(std::move(text));
  }

  void children_as_blocks(NodeHandle h, std::vector<std::string>& out) {
    std::string buf;
    for (NodeHandle c : tree_.children(h)) {
      if (tree_.is_element(c)) {
        const std::string& tag = tree_.tag(c);
        if (is_skipped(tag)) continue;
        if (tag == "br") {
          buf += kBreak;
          continue;
        }
        if (is_block_tag(tag)) {
          push_paragraph(buf, out);
          block(c, out);
          continue;
        }
      }
      inline_node(c, buf);
    }
    push_paragraph(buf, out);
  }

  std::string blocks_of(NodeHandle h, std::string_view sep = "\n\n") {
    std::vector<std::string> parts;
    children_as_blocks(h, parts);
    return join(parts, sep);
  }

  std::string inline_of(NodeHandle h) {
    std::string buf;
    for (NodeHandle c : tree_.children(h)) inline_node(c, buf);
    return finish_inline(buf);
  }

  // Single-line form, used for headings and table cells.
  std::string flat_inline_of(NodeHandle h) {
    std::string s = inline_of(h);
    std::replace(s.begin(), s.end(), '\n', ' ');
    return collapse_ascii_whitespace(s);
  }

  void block(NodeHandle h, std::vector<std::string>& out) {
    const std::string& tag = tree_.tag(h);
    if (is_heading(tag)) {
      const std::string text = flat_inline_of(h);
      if (!text.empty()) out.push_back(std::string(static_cast<std::size_t>(tag[1] - '0'), '#') + " " + text);
      return;
    }
    if (tag == "ul" || tag == "ol") {
      out.push_back(list(h, tag == "ol"));
      return;
    }
    if (tag == "dl") {
      out.push_back(definition_list(h));
      return;
    }
    if (tag == "table") {
      table(h, out);
      return;
    }
    if (tag == "pre") {
      out.push_back(pre(h));
      return;
    }
    if (tag == "blockquote") {
      const std::string inner = blocks_of(h);
      if (!inner.empty()) out.push_back(indent_lines(inner, "> ", "> "));
      return;
    }
    if (tag == "hr") {
      out.emplace_back("---");
      return;
    }
    children_as_blocks(h, out);
  }

  std::string list(NodeHandle h, bool ordered) {
    std::vector<std::string> items;
    std::size_t number = 1;
    for (NodeHandle c : tree_.children(h)) {
      if (tree_.is_element(c, "li")) {
        const std::string marker = ordered ? std::to_string(number++) + ". " : "- ";
        const std::string body = blocks_of(c, "\n");
        if (body.empty()) continue;
        items.push_back(indent_lines(body, marker, std::string(marker.size(), ' ')));
      } else if (tree_.is_element(c) && is_block_tag(tree_.tag(c))) {
        std::vector<std::string> parts;
        block(c, parts);
        for (std::string& p : parts) items.push_back(std::move(p));
      } else {
        std::string buf;
        inline_node(c, buf);
        const std::string text = finish_inline(buf);
        if (!text.empty()) items.push_back(text);
      }
    }
    return join(items, "\n");
  }

  std::string definition_list(NodeHandle h) {
    std::vector<std::string> lines;
    for (NodeHandle c : tree_.children(h)) {
      if (!tree_.is_element(c)) {
        std::string buf;
        inline_node(c, buf);
        const std::string text = finish_inline(buf);
        if (!text.empty()) lines.push_back(text);
        continue;
      }
      const std::string body = blocks_of(c, "\n");
      if (body.empty()) continue;
      lines.push_back(tree_.tag(c) == "dd" ? indent_lines(body, "  ", "  ") : body);
    }
    return join(lines, "\n");
  }

  bool table_has_block_content(NodeHandle table) const {
    bool found = false;
    tree_.visit(table, [&](NodeHandle n) {
      if (found || !tree_.is_element(n)) return false;
      const std::string& tag = tree_.tag(n);
      if (n != table && (is_heading(tag) || in_list(tag, {"p", "div", "ul", "ol", "dl", "table", "pre", "blockquote"}))) {
        found = true;
        return false;
      }
      return true;
    });
    return found;
  }

  void collect_rows(NodeHandle h, std::vector<NodeHandle>& rows, std::vector<NodeHandle>& captions) const {
    for (NodeHandle c : tree_.children(h)) {
      if (!tree_.is_element(c)) continue;
      const std::string& tag = tree_.tag(c);
      if (tag == "tr") rows.push_back(c);
      else if (tag == "caption") captions.push_back(c);
      else if (in_list(tag, {"thead", "tbody", "tfoot"})) collect_rows(c, rows, captions);
    }
  }

  static std::string escape_cell(std::string s) {
    std::string out;
    for (char c : s) {
      if (c == '|') out += "\\|";
      else out.push_back(c);
    }
    return out;
  }

  void table(NodeHandle h, std::vector<std::string>& out) {
    if (table_has_block_content(h)) {
      // Layout table: its cells are page regions, not data.
      std::vector<NodeHandle> rows, captions;
      collect_rows(h, rows, captions);
      for (NodeHandle c : captions) children_as_blocks(c, out);
      for (NodeHandle r : rows) {
        for (NodeHandle cell : tree_.children(r)) {
          if (tree_.is_element(cell)) children_as_blocks(cell, out);
        }
      }
      return;
    }
    std::vector<NodeHandle> rows, captions;
    collect_rows(h, rows, captions);
    for (NodeHandle c : captions) {
      const std::string text = flat_inline_of(c);
      if (!text.empty()) out.push_back(text);
    }
    std::vector<std::vector<std::string>> grid;
    std::size_t columns = 0;
    for (NodeHandle r : rows) {
      std::vector<std::string> cells;
      for (NodeHandle cell : tree_.children(r)) {
        if (tree_.is_element(cell, "td") || tree_.is_element(cell, "th")) cells.push_back(escape_cell(flat_inline_of(cell)));
      }
      if (cells.empty()) continue;
      columns = std::max(columns, cells.size());
      grid.push_back(std::move(cells));
    }
    if (grid.empty()) return;
    std::string text;
    for (std::size_t r = 0; r < grid.size(); ++r) {
      grid[r].resize(columns);
      if (r > 0) text += '\n';
      text += '|';
      for (const std::string& cell : grid[r]) text += cell.empty() ? std::string(" |") : " " + cell + " |";
      if (r == 0) {
        text += "\n|";
        for (std::size_t c = 0; c < columns; ++c) text += " --- |";
      }
    }
    out.push_back(std::move(text));
  }

  std::string pre(NodeHandle h) {
    std::string code = text_content(tree_, h);
    while (!code.empty() && (code.back() == '\n' || code.back() == '\r')) code.pop_back();
    while (!code.empty() && code.front() == '\n') code.erase(code.begin());
    if (!has_visible_text(code)) return {};
    const std::string fence = longest_backtick_run_fence(code, 3);
    return fence + "\n" + code + "\n" + fence;
  }

  void inline_node(NodeHandle h, std::string& buf) {
    switch (tree_.kind(h)) {
      case NodeKind::Text:
        buf += tree_.text(h);
        return;
      case NodeKind::Element:
        break;
      default:
        return;
    }
    const std::string& tag = tree_.tag(h);
    if (is_skipped(tag)) return;
    if (tag == "br") {
      buf += kBreak;
      return;
    }
    if (tag == "img") {
      if (const std::string* alt = tree_.attribute(h, "alt"); alt != nullptr && has_visible_text(*alt)) {
        buf += ' ';
        buf += *alt;
        buf += ' ';
      }
      return;
    }
    if (tag == "a") {
      const std::string text = flat_inline_of(h);
      const std::string* href = tree_.attribute(h, "href");
      if (text.empty()) return;
      if (href != nullptr && !trim_ascii(*href).empty()) {
        const std::string_view url = trim_ascii(*href);
        const bool awkward = url.find_first_of(" ()<>\n\t") != std::string_view::npos;
        buf += "[" + text + "](" + (awkward ? "<" + std::string(url) + ">" : std::string(url)) + ")";
      } else {
        buf += text;
      }
      return;
    }
    if (tag == "code" || tag == "kbd" || tag == "samp" || tag == "tt") {
      const std::string text = collapse_ascii_whitespace(text_content(tree_, h));
      const std::string_view t = trim_ascii(text);
      if (t.empty()) {
        buf += text;
        return;
      }
      const std::string fence = longest_backtick_run_fence(t, 1);
      const bool pad = t.front() == '`' || t.back() == '`';
      buf += fence + (pad ? " " : "") + std::string(t) + (pad ? " " : "") + fence;
      return;
    }
    if (is_block_tag(tag)) {
      // Block content reached from an inline context: keep it on its own lines.
      buf += kBreak;
      std::string inner = blocks_of(h);
      for (std::size_t pos = 0; (pos = inner.find('\n', pos)) != std::string::npos;) {
        inner.replace(pos, 1, kBreak);
        pos += kBreak.size();
      }
      buf += inner;
      buf += kBreak;
      return;
    }
    for (NodeHandle c : tree_.children(h)) inline_node(c, buf);
  }

  const DomTree& tree_;
};

}  // namespace detail::md

/// Markdown for the subtree at `h` under the fixed ruleset (headings, lists,
/// pipe tables, fenced pre, links, alt text; everything else as text).
inline std::string dom_to_markdown(const DomTree& tree, NodeHandle h) { return detail::md::Renderer(tree).render(h); }

inline std::string html_to_markdown(std::string_view main_html) {
  if (main_html.empty()) return {};
  const DomTree tree = parse_html_text(main_html);
  return dom_to_markdown(tree, tree.root());
}

}  // namespace dripper
