#pragma once

#include "oxpath/oxpath.hpp"

#include <functional>
#include <random>
#include <set>
#include <string>

namespace oxpath::tests {

inline std::string fixture(const std::string& rel) { return std::string(OXPATH_FIXTURE_DIR) + "/" + rel; }

inline SiteManifest site(const std::string& name) { return SiteManifest::load(fixture(name + "/site.json")); }

struct Run {
    OutputNode tree;
    EvalReport report;
};

inline Run run_wrapper(const SiteManifest& manifest, const std::string& source) {
    BrowserSession session(manifest);
    Engine engine(session);
    auto [tree, report] = engine.evaluate_tree(parse(source));
    return {std::move(tree), std::move(report)};
}

inline Run run_wrapper(const std::string& site_name, const std::string& source) {
    return run_wrapper(site(site_name), source);
}

/// Linear pagination chain p1 -> p2 -> ... -> pL; the last page has no link.
inline SiteManifest chain_site(std::size_t length) {
    SiteManifest m;
    for (std::size_t k = 1; k <= length; ++k) {
        std::string html = "<html><body><h1>Page " + std::to_string(k) + "</h1>";
        if (k < length) html += "<a class=\"next\" href=\"p" + std::to_string(k + 1) + ".html\">next</a>";
        html += "</body></html>";
        m.add_page("http://chain.example/p" + std::to_string(k) + ".html", html);
    }
    return m;
}

inline std::size_t count_named(const OutputNode& n, const std::string& name) {
    std::size_t c = n.kind != OutputKind::Root && n.name == name ? 1 : 0;
    for (const auto& ch : n.children) c += count_named(ch, name);
    return c;
}

inline std::vector<std::string> values_named(const OutputNode& n, const std::string& name) {
    std::vector<std::string> out;
    if (n.kind == OutputKind::Attribute && n.name == name) out.push_back(*n.value);
    for (const auto& ch : n.children) {
        auto sub = values_named(ch, name);
        out.insert(out.end(), sub.begin(), sub.end());
    }
    return out;
}

/// Random output tree: depth <= max_depth, fan-out <= max_fanout. Names come
/// from a small pool so duplicates are common; values exercise escaping.
inline OutputNode random_output_tree(std::mt19937& rng, int max_depth = 4, int max_fanout = 4,
                                     bool unique_attribute_names = false) {
    static const std::vector<std::string> names{"a", "b", "item", "author", "x-y", "_z"};
    static const std::vector<std::string> values{"",      "plain",  "with space", "a|b",  "back\\slash", "<tag>&amp;",
                                                 "q\"uo'te", "]]>",  "comma,field", "line\nbreak", "ünïcode ✓", " pad "};
    auto pick = [&](const auto& v) { return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)]; };
    std::function<void(OutputNode&, int)> fill = [&](OutputNode& parent, int depth) {
        int fan = std::uniform_int_distribution<int>(0, max_fanout)(rng);
        std::set<std::string> used;
        for (int i = 0; i < fan; ++i) {
            bool record = depth < max_depth && std::uniform_int_distribution<int>(0, 2)(rng) == 0;
            if (record) {
                OutputNode r = OutputNode::record(pick(names));
                fill(r, depth + 1);
                parent.add_child(std::move(r));
            } else {
                std::string name = pick(names);
                if (unique_attribute_names) {
                    if (used.count(name)) continue;
                    used.insert(name);
                }
                parent.add_child(OutputNode::attribute(name, pick(values)));
            }
        }
    };
    OutputNode root = OutputNode::root();
    fill(root, 1);
    return root;
}

} // namespace oxpath::tests
