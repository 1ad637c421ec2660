#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "dripper/detail/utf8.hpp"
#include "dripper/dom.hpp"
#include "dripper/error.hpp"
#include "dripper/html_parser.hpp"

namespace dripper {

enum class ComplexityLevel { Simple, Mid, Hard };

inline std::string to_string(ComplexityLevel l) {
  switch (l) {
    case ComplexityLevel::Simple: return "simple";
    case ComplexityLevel::Mid: return "mid";
    case ComplexityLevel::Hard: return "hard";
  }
  return "mid";
}

struct RichContentFlags {
  bool table = false;
  bool code = false;
  bool equation = false;
  bool operator==(const RichContentFlags&) const = default;
};

/// Raw per-page metrics, before corpus normalization.
struct ComplexityMetrics {
  double dom_structural = 0;
  double text_sparsity = 0;
  double content_diversity = 0;
  double link_density = 0;
};

struct ComplexityProfile {
  ComplexityMetrics raw;
  // min-max normalized over the corpus
  double dom_structural = 0;
  double text_sparsity = 0;
  double content_diversity = 0;
  double link_density = 0;
  double overall = 0;
  ComplexityLevel level = ComplexityLevel::Mid;
};

struct ComplexityWeights {
  double dom_structural = 0.25;
  double text_sparsity = 0.25;
  double content_diversity = 0.25;
  double link_density = 0.25;

  void validate() const {
    const std::array<double, 4> w{dom_structural, text_sparsity, content_diversity, link_density};
    double sum = 0;
    for (double v : w) {
      if (!std::isfinite(v) || v < 0) throw Error(ErrorCode::InvalidConfig, "complexity weights must be non-negative");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::InvalidConfig, "complexity weights must sum to 1");
  }
};

namespace detail {

inline bool is_invisible_subtree(std::string_view tag) {
  return in_list(tag, {"head", "title", "script", "style", "template", "noscript"});
}

inline std::string visible_text(const DomTree& tree) {
  std::string out;
  tree.visit(tree.root(), [&](NodeHandle h) {
    if (tree.is_element(h) && is_invisible_subtree(tree.tag(h))) return false;
    if (tree.is_text(h)) out += tree.text(h);
    return true;
  });
  return out;
}

inline std::size_t visible_chars(std::string_view s) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.size();) {
    const auto d = decode_utf8(s, i);
    if (!is_space(d.value)) ++n;
    i += d.length;
  }
  return n;
}

inline bool has_latex(std::string_view text) {
  static const std::regex kDisplay(R"(\$\$[\s\S]+?\$\$)");
  if (text.find("\\(") != std::string_view::npos || text.find("\\[") != std::string_view::npos) return true;
  return std::regex_search(text.begin(), text.end(), kDisplay);
}

inline RichContentFlags rich_content_tags(const DomTree& tree) {
  RichContentFlags f;
  tree.visit(tree.root(), [&](NodeHandle h) {
    if (!tree.is_element(h)) return true;
    const std::string& tag = tree.tag(h);
    if (tag == "table") f.table = true;
    if (tag == "code") f.code = true;
    if (tag == "math") f.equation = true;
    return true;
  });
  if (!f.equation) f.equation = has_latex(visible_text(tree));
  return f;
}

}  // namespace detail

inline RichContentFlags rich_content_tags(std::string_view raw_html) {
  return detail::rich_content_tags(parse_html_text(raw_html));
}

inline ComplexityMetrics complexity_metrics(const DomTree& tree) {
  ComplexityMetrics m;
  std::size_t max_depth = 0, max_width = 0;
  std::size_t total_chars = 0, link_chars = 0;
  // Leaves in document order: 1 for visible text, 0 for anything else.
  std::vector<unsigned char> leaves;
  std::array<bool, 7> kinds{};  // table code equation image list media form

  struct Frame {
    NodeHandle h;
    std::size_t depth;
    bool in_link;
  };
  std::vector<Frame> stack{{tree.root(), 0, false}};
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    if (tree.is_text(f.h)) {
      const std::size_t chars = detail::visible_chars(tree.text(f.h));
      if (chars == 0) continue;
      total_chars += chars;
      if (f.in_link) link_chars += chars;
      leaves.push_back(1);
      continue;
    }
    if (f.h != tree.root() && !tree.is_element(f.h)) continue;
    bool link = f.in_link;
    if (tree.is_element(f.h)) {
      const std::string& tag = tree.tag(f.h);
      if (detail::is_invisible_subtree(tag)) continue;
      max_depth = std::max(max_depth, f.depth);
      if (tag == "a") link = true;
      if (tag == "table") kinds[0] = true;
      if (tag == "code" || tag == "pre") kinds[1] = true;
      if (tag == "math") kinds[2] = true;
      if (tag == "img" || tag == "picture" || tag == "svg") kinds[3] = true;
      if (tag == "ul" || tag == "ol" || tag == "dl") kinds[4] = true;
      if (detail::in_list(tag, {"video", "audio", "iframe", "embed", "object"})) kinds[5] = true;
      if (detail::in_list(tag, {"form", "input", "select", "textarea"})) kinds[6] = true;
    }
    std::size_t element_kids = 0;
    bool has_content_child = false;
    const auto& kids = tree.children(f.h);
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) {
      if (tree.is_element(*it)) {
        ++element_kids;
        has_content_child = true;
      } else if (tree.is_text(*it) && detail::has_visible_text(tree.text(*it))) {
        has_content_child = true;
      }
      stack.push_back({*it, f.depth + 1, link});
    }
    max_width = std::max(max_width, element_kids);
    if (tree.is_element(f.h) && !has_content_child) leaves.push_back(0);
  }
  if (!kinds[2]) kinds[2] = detail::has_latex(detail::visible_text(tree));

  m.dom_structural = static_cast<double>(max_depth) + std::log2(1.0 + static_cast<double>(max_width));
  std::size_t transitions = 0;
  for (std::size_t i = 1; i < leaves.size(); ++i) transitions += leaves[i] != leaves[i - 1];
  m.text_sparsity = leaves.size() > 1 ? static_cast<double>(transitions) / static_cast<double>(leaves.size() - 1) : 0.0;
  m.content_diversity = static_cast<double>(std::count(kinds.begin(), kinds.end(), true));
  m.link_density = total_chars ? static_cast<double>(link_chars) / static_cast<double>(total_chars) : 0.0;
  return m;
}

inline ComplexityMetrics complexity_metrics(std::string_view raw_html) {
  if (raw_html.empty()) return {};
  return complexity_metrics(parse_html_text(raw_html));
}

/// Nearest-rank percentile: the ceil(p*n)-th smallest value.
inline double nearest_rank(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(values.size()) - 1e-9));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

/// Corpus-level step: min-max normalization, weighted sum, and level cuts at
/// the 30th and 70th percentiles of the overall score.
inline std::vector<ComplexityProfile> finalize_complexity(const std::vector<ComplexityMetrics>& metrics,
                                                          const ComplexityWeights& weights = {}) {
  weights.validate();
  std::vector<ComplexityProfile> out(metrics.size());
  if (metrics.empty()) return out;
  auto normalize = [&](double ComplexityMetrics::*field, double ComplexityProfile::*dst) {
    double lo = metrics.front().*field, hi = lo;
    for (const auto& m : metrics) {
      lo = std::min(lo, m.*field);
      hi = std::max(hi, m.*field);
    }
    for (std::size_t i = 0; i < metrics.size(); ++i) {
      out[i].*dst = hi > lo ? (metrics[i].*field - lo) / (hi - lo) : 0.0;
    }
  };
  normalize(&ComplexityMetrics::dom_structural, &ComplexityProfile::dom_structural);
  normalize(&ComplexityMetrics::text_sparsity, &ComplexityProfile::text_sparsity);
  normalize(&ComplexityMetrics::content_diversity, &ComplexityProfile::content_diversity);
  normalize(&ComplexityMetrics::link_density, &ComplexityProfile::link_density);
  std::vector<double> overall;
  for (std::size_t i = 0; i < out.size(); ++i) {
    ComplexityProfile& p = out[i];
    p.raw = metrics[i];
    p.overall = weights.dom_structural * p.dom_structural + weights.text_sparsity * p.text_sparsity +
                weights.content_diversity * p.content_diversity + weights.link_density * p.link_density;
    overall.push_back(p.overall);
  }
  const double p30 = nearest_rank(overall, 0.30);
  const double p70 = nearest_rank(overall, 0.70);
  for (ComplexityProfile& p : out) {
    p.level = p.overall <= p30 ? ComplexityLevel::Simple : p.overall > p70 ? ComplexityLevel::Hard : ComplexityLevel::Mid;
  }
  return out;
}

}  // namespace dripper
