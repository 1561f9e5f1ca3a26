#include "serializer_oracles.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <map>

using namespace oxpath;
namespace so = oxpath::tests::serial;

namespace {

OutputNode gottlob_tree() {
    OutputNode root = OutputNode::root();
    OutputNode& coll = root.add_child(OutputNode::record("collection"));
    coll.add_child(OutputNode::attribute("author", "Georg Gottlob"));
    OutputNode& arts = coll.add_child(OutputNode::record("articles"));
    OutputNode& a1 = arts.add_child(OutputNode::record("article"));
    a1.add_child(OutputNode::attribute("author", "Tim Furche"));
    a1.add_child(OutputNode::attribute("author", "Georg Gottlob"));
    a1.add_child(OutputNode::attribute("title", "OXPath"));
    a1.add_child(OutputNode::attribute("pages", "47-72"));
    OutputNode& a2 = arts.add_child(OutputNode::record("article"));
    a2.add_child(OutputNode::attribute("author", "Georg Gottlob"));
    a2.add_child(OutputNode::attribute("title", "A note on | and \\"));
    return root;
}

} // namespace

// --- XML -------------------------------------------------------------------------

TEST(Xml, JournalsGolden) {
    auto r = tests::run_wrapper("dblp-mini", read_file(std::string(OXPATH_CORPUS_DIR) + "/dblp-output-tree.oxp"));
    EXPECT_EQ(to_xml(r.tree), "<?xml version=\"1.1\" encoding=\"UTF-8\"?>\n"
                              "<results>\n"
                              "  <title>Computer Science Journals</title>\n"
                              "  <journals>\n"
                              "    <journal>\n"
                              "      <name>3-D Information Modeling; International Journal of  ... (IJ3DIM)</name>\n"
                              "      <url>http://dblp.dagstuhl.de/db/journals/ij3dim</url>\n"
                              "    </journal>\n"
                              "    <journal>\n"
                              "      <name>4OR: Quarterly Journal of the Belgian, French and Italian Operations "
                              "Research Societies</name>\n"
                              "      <url>http://dblp.dagstuhl.de/db/journals/4or</url>\n"
                              "    </journal>\n"
                              "  </journals>\n"
                              "</results>\n");
}

TEST(Xml, EmptyRootAndEscaping) {
    EXPECT_EQ(to_xml(OutputNode::root()), kXmlDeclaration + "\n<results/>\n");
    OutputNode t = OutputNode::root();
    t.add_child(OutputNode::attribute("v", "a<b&c>d"));
    t.add_child(OutputNode::attribute("e", ""));
    t.add_child(OutputNode::record("r"));
    EXPECT_EQ(to_xml(t), kXmlDeclaration + "\n<results>\n  <v>a&lt;b&amp;c&gt;d</v>\n  <e><![CDATA[]]></e>\n  <r/>\n</results>\n");
    EXPECT_EQ(from_xml(to_xml(t)), t);
}

TEST(Xml, CdataSplitsTerminator) {
    OutputNode t = OutputNode::root();
    t.add_child(OutputNode::attribute("v", "x]]>y"));
    SerializeOptions cd;
    cd.xmlcd = true;
    std::string xml = to_xml(t, cd);
    EXPECT_NE(xml.find("<v><![CDATA[x]]]]><![CDATA[>y]]></v>"), std::string::npos);
    EXPECT_EQ(from_xml(xml), t);
}

TEST(Xml, DuplicateAttributesNeedMval) {
    OutputNode t = gottlob_tree();
    try {
        to_xml(t);
        FAIL();
    } catch (const SerializeError& e) {
        EXPECT_EQ(e.kind(), SerializeErrorKind::DuplicateAttribute);
    }
    SerializeOptions mval;
    mval.mval = true;
    std::string xml = to_xml(t, mval);
    EXPECT_NE(xml.find("<author>Tim Furche</author>\n        <author>Georg Gottlob</author>"), std::string::npos);
    // Same-name records are always fine.
    OutputNode recs = OutputNode::root();
    recs.add_child(OutputNode::record("r"));
    recs.add_child(OutputNode::record("r"));
    EXPECT_NO_THROW(to_xml(recs));
}

TEST(XmlProperty, Bijective) {
    std::mt19937 rng(2024);
    SerializeOptions mval;
    mval.mval = true;
    for (int i = 0; i < 200; ++i) {
        OutputNode t = tests::random_output_tree(rng, 4, 4);
        ASSERT_LE(so::depth(t), 5u);
        EXPECT_EQ(from_xml(to_xml(t, mval)), t) << to_xml(t, mval);
        SerializeOptions cd = mval;
        cd.xmlcd = true;
        EXPECT_EQ(from_xml(to_xml(t, cd)), t);
    }
}

TEST(XmlProperty, MvalFalseRejectsExactlyDuplicates) {
    std::mt19937 rng(99);
    std::size_t rejected = 0;
    for (int i = 0; i < 200; ++i) {
        OutputNode t = tests::random_output_tree(rng, 4, 4);
        bool dup = so::has_duplicate_attribute(t);
        bool threw = false;
        try {
            to_xml(t);
        } catch (const SerializeError& e) {
            threw = e.kind() == SerializeErrorKind::DuplicateAttribute;
        }
        EXPECT_EQ(threw, dup);
        rejected += threw;
    }
    EXPECT_GT(rejected, 0u);
}

// --- JSON ------------------------------------------------------------------------

TEST(Json, ShapesAndArrays) {
    EXPECT_EQ(to_json(OutputNode::root()), "{}\n");
    OutputNode t = OutputNode::root();
    OutputNode& j = t.add_child(OutputNode::record("journal"));
    j.add_child(OutputNode::attribute("name", "4OR"));
    j.add_child(OutputNode::attribute("url", "http://dblp.dagstuhl.de/db/journals/4or"));
    EXPECT_EQ(nlohmann::json::parse(to_json(t)),
              nlohmann::json::parse(R"({"journal":{"name":"4OR","url":"http://dblp.dagstuhl.de/db/journals/4or"}})"));

    OutputNode one = OutputNode::root();
    OutputNode& art = one.add_child(OutputNode::record("article"));
    art.add_child(OutputNode::attribute("author", "A"));
    art.add_child(OutputNode::attribute("author", "B"));
    SerializeOptions o;
    try {
        to_json(one, o);
        FAIL();
    } catch (const SerializeError& e) {
        EXPECT_EQ(e.kind(), SerializeErrorKind::DuplicateAttribute);
    }
    o.mval = true;
    OutputNode g = gottlob_tree();
    try {
        to_json(g, o);
        FAIL();
    } catch (const SerializeError& e) {
        EXPECT_EQ(e.kind(), SerializeErrorKind::DuplicateKey);
    }
    o.jsonarr = true;
    auto parsed = nlohmann::json::parse(to_json(g, o));
    const auto& arts = parsed["collection"]["articles"]["article"];
    ASSERT_TRUE(arts.is_array());
    EXPECT_EQ(arts[0]["author"], nlohmann::json::parse(R"(["Tim Furche","Georg Gottlob"])"));
    EXPECT_EQ(arts[1]["title"], "A note on | and \\");
}

TEST(Json, MemberOrderFollowsFirstOccurrence) {
    OutputNode t = OutputNode::root();
    t.add_child(OutputNode::attribute("z", "1"));
    t.add_child(OutputNode::attribute("a", "2"));
    t.add_child(OutputNode::attribute("z", "3"));
    SerializeOptions o;
    o.mval = o.jsonarr = true;
    EXPECT_EQ(to_json(t, o), "{\n  \"z\": [\n    \"1\",\n    \"3\"\n  ],\n  \"a\": \"2\"\n}\n");
}

// --- CSV helpers -----------------------------------------------------------------

TEST(Csv, QuotingRoundTrip) {
    std::vector<std::string> fields{"plain", "a,b", "say \"hi\"", "two\nlines", "", "tail\r"};
    EXPECT_EQ(csv_row({"a,b", "q\""}), "\"a,b\",\"q\"\"\"\n");
    auto rows = parse_csv(csv_row(fields) + csv_row({"x"}));
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0], fields);
    EXPECT_EQ(rows[1], std::vector<std::string>{"x"});
}

TEST(CsvProperty, JoinEscapedRoundTrip) {
    std::mt19937 rng(5);
    const std::string alphabet = "ab|\\, ";
    for (int i = 0; i < 500; ++i) {
        std::vector<std::string> xs(1 + rng() % 4);
        for (auto& x : xs)
            for (std::size_t k = rng() % 5; k-- > 0;) x += alphabet[rng() % alphabet.size()];
        EXPECT_EQ(text::split_escaped(text::join_escaped(xs)), xs);
    }
    EXPECT_EQ(text::join_escaped({"A|B", "C"}), "A\\|B|C");
}

// --- rscsv -----------------------------------------------------------------------

TEST(RsCsv, GottlobRows) {
    SerializeOptions o;
    o.mval = true;
    o.rsent = "article";
    o.rsattrs = std::vector<std::string>{"author", "title", "publication", "pages"};
    EXPECT_EQ(to_rscsv(gottlob_tree(), o), "author,title,publication,pages\n"
                                           "Tim Furche|Georg Gottlob,OXPath,,47-72\n"
                                           "Georg Gottlob,A note on \\| and \\\\,,\n");
    o.mval = false;
    EXPECT_EQ(parse_csv(to_rscsv(gottlob_tree(), o))[1][0], "Tim Furche");
    // The collection's own author is not an article attribute.
    o.rsent = "collection";
    EXPECT_EQ(to_rscsv(gottlob_tree(), o), "author,title,publication,pages\nGeorg Gottlob,,,\n");
}

TEST(RsCsv, RequiresOptions) {
    std::ostringstream out;
    SerializeOptions o;
    EXPECT_THROW(RsCsvWriter(out, o), ConfigError);
    o.rsent = "a";
    EXPECT_THROW(RsCsvWriter(out, o), ConfigError);
}

TEST(RsCsvProperty, NearestRecordAncestor) {
    std::mt19937 rng(77);
    const std::vector<std::string> attrs{"a", "author", "x-y", "_z"};
    std::size_t rows_seen = 0;
    for (int i = 0; i < 100; ++i) {
        OutputNode t = tests::random_output_tree(rng, 4, 4);
        for (const char* rsent : {"a", "b", "item", "author", "x-y", "_z"}) {
            SerializeOptions o;
            o.mval = true;
            o.rsent = rsent;
            o.rsattrs = attrs;
            auto rows = parse_csv(to_rscsv(t, o));
            auto expected = so::rscsv_oracle(t, rsent, attrs);
            ASSERT_EQ(rows.size(), expected.size() + 1);
            EXPECT_EQ(rows[0], attrs);
            for (std::size_t r = 0; r < expected.size(); ++r) {
                ASSERT_EQ(rows[r + 1].size(), attrs.size());
                for (std::size_t c = 0; c < attrs.size(); ++c) {
                    std::vector<std::string> got =
                        rows[r + 1][c].empty() ? std::vector<std::string>{} : text::split_escaped(rows[r + 1][c]);
                    // An empty single value and a missing one share the empty cell.
                    std::vector<std::string> want = expected[r][c];
                    if (want == std::vector<std::string>{""}) want.clear();
                    EXPECT_EQ(got, want);
                }
            }
            rows_seen += expected.size();
        }
    }
    EXPECT_GT(rows_seen, 100u);
}

TEST(RsCsvProperty, StreamingMemoryIndependentOfRecordCount) {
    auto small = so::stream_records(100);
    auto large = so::stream_records(10000);
    EXPECT_EQ(small.rows, 100u);
    EXPECT_EQ(large.rows, 10000u);
    EXPECT_EQ(small.peak_open, large.peak_open);
    EXPECT_GT(small.peak_live_growth, 0);
    EXPECT_LE(large.peak_live_growth, small.peak_live_growth + 256);
    // Control: holding the whole tree does grow with the record count.
    auto held_small = so::stream_records(100, true);
    auto held_large = so::stream_records(10000, true);
    EXPECT_GT(held_large.peak_live_growth, 50 * held_small.peak_live_growth);
}

// --- hcsv ------------------------------------------------------------------------

TEST(HCsv, GottlobGolden) {
    SerializeOptions o;
    o.mval = true;
    o.hents = std::vector<std::string>{"collection", "articles/article"};
    EXPECT_EQ(to_hcsv(gottlob_tree(), o), "collection_id,collection_author,article_id,articles_article_author,"
                                          "articles_article_title,articles_article_pages\n"
                                          "1,Georg Gottlob,1,Tim Furche|Georg Gottlob,OXPath,47-72\n"
                                          "1,Georg Gottlob,2,Georg Gottlob,A note on \\| and \\\\,\n");
}

TEST(HCsv, IdsAreGlobalPerLevel) {
    OutputNode t = OutputNode::root();
    for (int c = 0; c < 2; ++c) {
        OutputNode& coll = t.add_child(OutputNode::record("collection"));
        OutputNode& arts = coll.add_child(OutputNode::record("articles"));
        for (int a = 0; a < 2; ++a)
            arts.add_child(OutputNode::record("article")).add_child(OutputNode::attribute("n", std::to_string(a)));
    }
    t.add_child(OutputNode::record("collection"));
    SerializeOptions o;
    o.hents = std::vector<std::string>{"collection", "articles/article"};
    EXPECT_EQ(to_hcsv(t, o), "collection_id,article_id,articles_article_n\n"
                             "1,1,0\n1,2,1\n2,3,0\n2,4,1\n3,,\n");
}

TEST(HCsv, SingleLevelAndErrors) {
    OutputNode t = OutputNode::root();
    OutputNode& r = t.add_child(OutputNode::record("r"));
    r.add_child(OutputNode::attribute("a", "1"));
    r.add_child(OutputNode::attribute("b", "2"));
    SerializeOptions o;
    o.hents = std::vector<std::string>{"r"};
    EXPECT_EQ(to_hcsv(t, o), "r_id,r_a,r_b\n1,1,2\n");
    o.hents = std::vector<std::string>{"r//a"};
    EXPECT_THROW(to_hcsv(t, o), SerializeError);
    o.hents = std::vector<std::string>{"r[1]"};
    EXPECT_THROW(to_hcsv(t, o), SerializeError);
    o.hents.reset();
    EXPECT_THROW(to_hcsv(t, o), ConfigError);
}

TEST(HCsvProperty, RowsReconstructProjection) {
    std::mt19937 rng(31337);
    std::size_t escapes = 0;
    for (int i = 0; i < 100; ++i) {
        OutputNode t = so::random_collection_tree(rng);
        SerializeOptions o;
        o.mval = true;
        o.hents = std::vector<std::string>{"collection", "articles/article"};
        auto csv = to_hcsv(t, o);
        escapes += csv.find("\\|") != std::string::npos || csv.find("\\\\") != std::string::npos;
        EXPECT_EQ(so::reconstruct_hcsv(parse_csv(csv)), so::project(t)) << csv;
    }
    EXPECT_GT(escapes, 10u);
}
