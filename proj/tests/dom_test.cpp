#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "dripper/dom.hpp"
#include "dripper/html_parser.hpp"

namespace dripper {
namespace {

std::vector<std::string> element_children_tags(const DomTree& tree, NodeHandle h) {
  std::vector<std::string> tags;
  for (NodeHandle c : tree.children(h)) {
    if (tree.is_element(c)) tags.push_back(tree.tag(c));
  }
  return tags;
}

// Tag structure as a bracketed string, e.g. "div(p()span())".
std::string shape(const DomTree& tree, NodeHandle h) {
  std::string out;
  for (NodeHandle c : tree.children(h)) {
    if (!tree.is_element(c)) continue;
    out += tree.tag(c) + "(" + shape(tree, c) + ")";
  }
  return out;
}

TEST(ParseHtml, MinimalParagraph) {
  const DomTree tree = parse_html("<p>hi</p>");
  ASSERT_EQ(tree.children(tree.root()).size(), 1u);
  const NodeHandle p = tree.children(tree.root())[0];
  EXPECT_TRUE(tree.is_element(p, "p"));
  ASSERT_EQ(tree.children(p).size(), 1u);
  EXPECT_EQ(tree.text(tree.children(p)[0]), "hi");
}

TEST(ParseHtml, UnclosedParagraphsBecomeSiblings) {
  const DomTree tree = parse_html("<p>a<p>b");
  EXPECT_EQ(shape(tree, tree.root()), "p()p()");
  EXPECT_EQ(text_content(tree, tree.children(tree.root())[0]), "a");
  EXPECT_EQ(text_content(tree, tree.children(tree.root())[1]), "b");
}

TEST(ParseHtml, BenchmarkSamplePage) {
  const DomTree tree = parse_html(
      "<html><body><h1 cc-select=True>Hello world!</h1><aside>advertisement</aside></body></html>");
  const NodeHandle body = tree.find_first("body");
  ASSERT_TRUE(body.valid());
  EXPECT_EQ(element_children_tags(tree, body), (std::vector<std::string>{"h1", "aside"}));
  const NodeHandle h1 = tree.find_first("h1");
  ASSERT_NE(tree.attribute(h1, "cc-select"), nullptr);
  EXPECT_EQ(*tree.attribute(h1, "cc-select"), "True");
}

TEST(ParseHtml, RepairsCommonBreakage) {
  EXPECT_EQ(shape(parse_html("<ul><li>a<li>b</ul>"), NodeHandle{0}), "ul(li()li())");
  EXPECT_EQ(shape(parse_html("<table><tr><td>a<td>b<tr><td>c</table>"), NodeHandle{0}),
            "table(tr(td()td())tr(td()))");
  EXPECT_EQ(shape(parse_html("<div><p>a</div>b"), NodeHandle{0}), "div(p())");
  EXPECT_EQ(shape(parse_html("<b><i>x</b>y</i>"), NodeHandle{0}), "b(i())");
  EXPECT_EQ(shape(parse_html("<dl><dt>a<dd>b<dt>c</dl>"), NodeHandle{0}), "dl(dt()dd()dt())");
  EXPECT_EQ(shape(parse_html("<p>x<div>y</div>"), NodeHandle{0}), "p()div()");
  EXPECT_EQ(shape(parse_html("<h1>a<h2>b"), NodeHandle{0}), "h1()h2()");
  // A stray end tag is ignored.
  EXPECT_EQ(shape(parse_html("<div>a</span>b</div>"), NodeHandle{0}), "div()");
}

TEST(ParseHtml, ContentAfterBodyEndStaysInBody) {
  const DomTree tree = parse_html("<html><body><p>a</p></body></html><p>late</p>");
  const NodeHandle body = tree.find_first("body");
  EXPECT_EQ(element_children_tags(tree, body), (std::vector<std::string>{"p", "p"}));
}

TEST(ParseHtml, RawTextElements) {
  const DomTree tree = parse_html("<div><script>if (a < b) { x = '</div>'; }</script>y</div>");
  const NodeHandle script = tree.find_first("script");
  ASSERT_TRUE(script.valid());
  EXPECT_EQ(tree.text(tree.children(script)[0]), "if (a < b) { x = '</div>'; }");
  EXPECT_EQ(text_content(tree, tree.find_first("div")), "y");
}

TEST(ParseHtml, EntitiesAndAttributes) {
  const DomTree tree = parse_html(R"(<a href='/x?a=1&amp;b=2' title=plain data-flag>&lt;tag&gt; &amp; &#169;&#x263A; &nbsp;&bogus;</a>)");
  const NodeHandle a = tree.find_first("a");
  EXPECT_EQ(*tree.attribute(a, "href"), "/x?a=1&b=2");
  EXPECT_EQ(*tree.attribute(a, "title"), "plain");
  EXPECT_EQ(*tree.attribute(a, "data-flag"), "");
  EXPECT_EQ(text_content(tree, a), "<tag> & \xC2\xA9\xE2\x98\xBA \xC2\xA0&bogus;");
}

TEST(ParseHtml, CommentsAndDoctypeArePreserved) {
  const DomTree tree = parse_html("<!DOCTYPE html><!-- note --><p>x</p>");
  const auto kids = tree.children(tree.root());
  ASSERT_EQ(kids.size(), 3u);
  EXPECT_EQ(tree.kind(kids[0]), NodeKind::Doctype);
  EXPECT_EQ(tree.kind(kids[1]), NodeKind::Comment);
  EXPECT_EQ(tree.text(kids[1]), " note ");
}

TEST(ParseHtml, LiteralLessThanIsText) {
  const DomTree tree = parse_html("<p>1 < 2 and 3 <= 4</p>");
  EXPECT_EQ(text_content(tree, tree.root()), "1 < 2 and 3 <= 4");
}

TEST(ParseHtml, EncodingFallbackChain) {
  // 0xE9 is "é" in windows-1252 but invalid UTF-8.
  const std::string latin1 = "<p>caf\xE9</p>";
  EXPECT_EQ(text_content(parse_html(latin1, "iso-8859-1"), NodeHandle{0}), "caf\xC3\xA9");
  const std::string declared = "<meta charset=\"windows-1252\"><p>caf\xE9</p>";
  EXPECT_EQ(text_content(parse_html(declared), NodeHandle{0}), "caf\xC3\xA9");
  EXPECT_EQ(text_content(parse_html(latin1), NodeHandle{0}), "caf\xEF\xBF\xBD");
  // Unknown hint falls through to UTF-8.
  EXPECT_EQ(text_content(parse_html("<p>ok</p>", "no-such-charset"), NodeHandle{0}), "ok");
}

TEST(ParseHtml, UndecodableInputIsAnError) {
  const std::string garbage(16, '\xFF');
  try {
    (void)parse_html(garbage);
    FAIL() << "expected EncodingUndecodable";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EncodingUndecodable);
  }
  EXPECT_THROW((void)parse_html(""), Error);
}

TEST(Serialize, SingleElement) {
  const DomTree tree = parse_html("<p>hi</p>");
  EXPECT_EQ(serialize(tree, tree.find_first("p")), "<p>hi</p>");
}

TEST(Serialize, AttributesAreQuoted) {
  DomTree tree;
  const NodeHandle div = tree.create_element("div", {{"class", "a"}, {"id", "b"}});
  tree.append_child(tree.root(), div);
  EXPECT_EQ(serialize(tree, div), R"(<div class="a" id="b"></div>)");
  tree.set_attribute(div, "title", "say \"hi\" & <go>");
  EXPECT_EQ(serialize(tree, div), R"(<div class="a" id="b" title="say &quot;hi&quot; &amp; &lt;go&gt;"></div>)");
}

TEST(Serialize, TextIsEscaped) {
  DomTree tree;
  const NodeHandle p = tree.create_element("p");
  tree.append_child(tree.root(), p);
  tree.append_child(p, tree.create_text("a < b & c"));
  EXPECT_EQ(serialize(tree, p), "<p>a &lt; b &amp; c</p>");
}

TEST(Serialize, VoidAndRawText) {
  const DomTree tree = parse_html("<div>a<br>b<img src=x.png><script>1<2</script></div>");
  EXPECT_EQ(serialize(tree, tree.find_first("div")), R"(<div>a<br>b<img src="x.png"><script>1<2</script></div>)");
}

TEST(TextContent, DocumentOrder) {
  const DomTree tree = parse_html("<p>a<b>b</b>c</p>");
  EXPECT_EQ(text_content(tree, tree.find_first("p")), "abc");
}

TEST(TextContent, SkipsScriptAndStyle) {
  const DomTree tree = parse_html("<div><script>x=1</script><style>.a{}</style>y</div>");
  const NodeHandle div = tree.find_first("div");
  // Manual traversal: the only text node outside script/style is "y".
  std::string manual;
  for (NodeHandle c : tree.children(div)) {
    if (tree.is_text(c)) manual += tree.text(c);
  }
  EXPECT_EQ(manual, "y");
  EXPECT_EQ(text_content(tree, div), manual);
}

TEST(TextContent, EmptyElement) {
  const DomTree tree = parse_html("<div></div>");
  EXPECT_EQ(text_content(tree, tree.find_first("div")), "");
}

TEST(DomTree, HandlesSurviveUnrelatedRemoval) {
  DomTree tree = parse_html("<div id=a><p>one</p></div><div id=b><p>two</p><span>three</span></div>");
  const NodeHandle a = tree.children(tree.root())[0];
  const NodeHandle b = tree.children(tree.root())[1];
  const NodeHandle span = tree.find_first("span", b);
  const NodeHandle p_in_b = tree.find_first("p", b);
  tree.remove(a);
  EXPECT_FALSE(tree.is_connected(a));
  EXPECT_TRUE(tree.is_connected(span));
  EXPECT_EQ(text_content(tree, span), "three");
  EXPECT_EQ(text_content(tree, p_in_b), "two");
  EXPECT_EQ(tree.parent(span), b);
  EXPECT_EQ(text_content(tree, tree.root()), "twothree");
}

TEST(DomTree, CopiesShareHandles) {
  const DomTree original = parse_html("<div><p>x</p></div>");
  DomTree copy = original;
  const NodeHandle p = original.find_first("p");
  copy.remove(p);
  EXPECT_TRUE(original.is_connected(p));
  EXPECT_FALSE(copy.is_connected(p));
  EXPECT_EQ(copy.tag(p), "p");
}

TEST(DomTree, WrapMovesSiblings) {
  DomTree tree = parse_html("<div>a<b>b</b>c<p>d</p></div>");
  const NodeHandle div = tree.find_first("div");
  std::vector<NodeHandle> run(tree.children(div).begin(), tree.children(div).begin() + 3);
  const NodeHandle span = tree.wrap(run, "span", {{"item-id", "1"}});
  EXPECT_EQ(serialize(tree, div), R"(<div><span item-id="1">a<b>b</b>c</span><p>d</p></div>)");
  EXPECT_EQ(tree.parent(span), div);
}

// Random trees over tags without implied-end-tag rules, with text that
// exercises escaping.
void grow(DomTree& tree, NodeHandle parent, std::mt19937& rng, int depth) {
  static const std::vector<std::string> kTags{"div", "span", "b", "em", "section", "article", "strong", "code"};
  static const std::vector<std::string> kTexts{"alpha", " ", "x < y", "a & b", "\"q\"", "caf\xC3\xA9", "\xE4\xBD\xA0\xE5\xA5\xBD", "1>0"};
  std::uniform_int_distribution<int> count(0, depth > 3 ? 1 : 4);
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    if (rng() % 3 == 0) {
      tree.append_child(parent, tree.create_text(kTexts[rng() % kTexts.size()]));
    } else {
      std::vector<Attribute> attrs;
      if (rng() % 2 == 0) attrs.push_back({"class", kTexts[rng() % kTexts.size()]});
      const NodeHandle el = tree.create_element(kTags[rng() % kTags.size()], std::move(attrs));
      tree.append_child(parent, el);
      grow(tree, el, rng, depth + 1);
    }
  }
}

TEST(DomTree, SerializeParseRoundTripProperty) {
  for (unsigned seed = 0; seed < 300; ++seed) {
    std::mt19937 rng(seed);
    DomTree tree;
    const NodeHandle body = tree.create_element("body");
    tree.append_child(tree.root(), body);
    grow(tree, body, rng, 0);
    const std::string html = serialize(tree);
    const DomTree reparsed = parse_html_text(html);
    ASSERT_EQ(text_content(reparsed, reparsed.root()), text_content(tree, tree.root())) << html;
    ASSERT_EQ(shape(reparsed, reparsed.root()), shape(tree, tree.root())) << html;
    ASSERT_EQ(serialize(reparsed), html);
  }
}

}  // namespace
}  // namespace dripper
