#include "support.hpp"

#include <gtest/gtest.h>

using namespace oxpath;

namespace {

Document example_doc() { return parse_document(read_file(tests::fixture("xpath-example/records.xml")), "http://example.org/records.xml"); }

NodeId first_element(const Document& d, std::string_view name) {
    for (NodeId n : d.in_document_order())
        if (d.is_element(n) && d.name(n) == name) return n;
    throw std::runtime_error("no element " + std::string(name));
}

std::vector<std::string> shape(const Document& d) {
    std::vector<std::string> out;
    for (NodeId n : d.in_document_order())
        out.push_back(std::to_string(static_cast<int>(d.kind(n))) + ":" + d.name(n) + "=" + d.value(n));
    return out;
}

} // namespace

TEST(Dom, ParsesElementWithAttribute) {
    auto d = parse_document(R"(<results><record type="online"/></results>)", "http://x/");
    auto results = d.document_element();
    ASSERT_TRUE(results);
    EXPECT_EQ(d.name(*results), "results");
    ASSERT_EQ(d.children(*results).size(), 1u);
    NodeId record = d.children(*results)[0];
    EXPECT_EQ(d.name(record), "record");
    ASSERT_EQ(d.attributes(record).size(), 1u);
    NodeId type = d.attributes(record)[0];
    EXPECT_EQ(d.kind(type), NodeKind::Attribute);
    EXPECT_EQ(d.name(type), "type");
    EXPECT_EQ(string_value(d, type), "online");
    EXPECT_EQ(d.parent(*results), d.root());
    EXPECT_FALSE(d.parent(d.root()));
}

TEST(Dom, EmptyInputIsParseError) { EXPECT_THROW(parse_document("", "http://x/"), ParseError); }

TEST(Dom, MalformedMarkupReportsPosition) {
    try {
        parse_document("<a>\n  <b></a>", "http://x/");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    EXPECT_THROW(parse_document("<a x=1></a>", "http://x/"), ParseError);
    EXPECT_THROW(parse_document("<a></a><b></b>", "http://x/"), ParseError);
}

TEST(Dom, ExampleTreeRelations) {
    auto d = example_doc();
    NodeId record = first_element(d, "record");
    std::vector<std::string> kids;
    for (NodeId c : d.children(record))
        if (d.is_element(c)) kids.push_back(d.name(c));
    EXPECT_EQ(kids, (std::vector<std::string>{"title", "authors", "ee", "date", "pages"}));
    EXPECT_EQ(d.parent(first_element(d, "authors")), record);
}

TEST(Dom, StringValues) {
    auto d = example_doc();
    NodeId pages = first_element(d, "pages");
    ASSERT_EQ(d.children(pages).size(), 1u);
    EXPECT_EQ(string_value(d, d.children(pages)[0]), "74-113");
    EXPECT_EQ(string_value(d, first_element(d, "authors")).find("Georg Gottlob") != std::string::npos, true);

    auto two = parse_document("<p>a<b>b</b></p>", "http://x/");
    EXPECT_EQ(string_value(two, *two.document_element()), "ab");
}

TEST(Dom, EntitiesAndCharacterReferences) {
    auto d = parse_document("<p title=\"&quot;q&quot;\">&amp;&lt;&gt;&apos;&#65;&#x42;&#x2713;</p>", "http://x/");
    NodeId p = *d.document_element();
    EXPECT_EQ(string_value(d, p), "&<>'AB\xE2\x9C\x93");
    EXPECT_EQ(*d.attribute(p, "title"), "\"q\"");
}

TEST(Dom, WhitespaceTextIsPreserved) {
    auto d = parse_document("<ul>\n  <li>x</li>\n</ul>", "http://x/");
    EXPECT_EQ(d.children(*d.document_element()).size(), 3u);
}

TEST(Dom, HtmlVoidElementsNeedNoClosingTag) {
    auto d = parse_document("<p>a<br>b<img src=\"x.png\"></p>", "http://x/");
    EXPECT_EQ(string_value(d, *d.document_element()), "ab");
}

// Attribute axis order: owner first, then attribute name.
TEST(Dom, AttributesOrderedByName) {
    auto d = parse_document(R"(<a z="1" b="2" m="3"/>)", "http://x/");
    NodeId a = *d.document_element();
    std::vector<std::string> names;
    for (NodeId n : d.in_document_order())
        if (d.kind(n) == NodeKind::Attribute) names.push_back(d.name(n));
    EXPECT_EQ(names, (std::vector<std::string>{"b", "m", "z"}));
    for (NodeId at : d.attributes(a)) EXPECT_LT(d.doc_order(a), d.doc_order(at));
}

class DomFixtureProperties : public ::testing::TestWithParam<std::string> {};

TEST_P(DomFixtureProperties, OrderAndStringValueAndReparse) {
    auto d = parse_document(read_file(tests::fixture(GetParam())), "http://x/");
    for (NodeId n : d.in_document_order()) {
        if (auto p = d.parent(n)) {
            EXPECT_LT(d.doc_order(*p), d.doc_order(n));
        }
    }
    for (NodeId n : d.in_document_order()) {
        if (!d.is_element(n)) continue;
        std::string joined;
        for (std::uint32_t o = d.doc_order(n); o < d.subtree_end(n); ++o) {
            NodeId m = d.at_order(o);
            if (d.kind(m) == NodeKind::Text) joined += d.value(m);
        }
        EXPECT_EQ(string_value(d, n), joined);
    }
    auto again = parse_document(serialize(d), "http://x/");
    EXPECT_EQ(shape(again), shape(d));
}

INSTANTIATE_TEST_SUITE_P(Fixtures, DomFixtureProperties,
                         ::testing::Values("dblp-mini/index.html", "gottlob/person.html", "acl/k16.html",
                                           "acl/results.html", "xpath-example/records.xml", "pag-3/p1.html"));

TEST(Dom, NodePathResolvesOnUnchangedTree) {
    auto d = parse_document(read_file(tests::fixture("gottlob/person.html")), "http://x/");
    for (NodeId n : d.in_document_order()) {
        auto path = path_of(d, n);
        auto back = resolve_path(d, path);
        ASSERT_TRUE(back);
        EXPECT_EQ(*back, n);
    }
}

TEST(Dom, NodePathFailsWhenNodeIsGone) {
    auto before = parse_document("<div><p>1</p><p>2</p></div>", "http://x/");
    auto after = parse_document("<div><p>1</p></div>", "http://x/");
    NodeId second = before.children(*before.document_element())[1];
    EXPECT_FALSE(resolve_path(after, path_of(before, second)));
}

TEST(Dom, SnapshotHashTracksContent) {
    auto a = parse_document("<p>1</p>", "http://x/");
    auto b = parse_document("<p>1</p>", "http://y/");
    auto c = parse_document("<p>2</p>", "http://x/");
    EXPECT_EQ(snapshot_hash(a), snapshot_hash(b));
    EXPECT_NE(snapshot_hash(a), snapshot_hash(c));
}

TEST(Visibility, Rules) {
    auto d = parse_document(R"(<body><div style="display: none"><a>x</a></div><a id="plain">y</a>)"
                            R"(<p hidden="hidden">h</p><span style="visibility:hidden">v</span>)"
                            R"(<i class="x disabled-hidden">c</i></body>)",
                            "http://x/");
    std::vector<bool> vis;
    for (NodeId n : d.in_document_order())
        if (d.is_element(n) && d.name(n) != "body") vis.push_back(is_visible(d, n));
    // div, a (inside div), a#plain, p, span, i
    EXPECT_EQ(vis, (std::vector<bool>{false, false, true, false, false, false}));
}
