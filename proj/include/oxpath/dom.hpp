#pragma once

// Immutable DOM snapshots parsed from well-formed (XHTML-style) fixture markup.
//
// A Document stores its nodes in an arena indexed by NodeId. Attribute nodes are
// owned by their element and follow it in document order, sorted by name, before
// the element's children. Edits go through TreeNode, the mutable form, and
// produce a fresh Document.

#include "oxpath/error.hpp"
#include "oxpath/text.hpp"
#include "oxpath/url.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace oxpath {

enum class NodeKind : std::uint8_t { Document, Element, Attribute, Text };

enum class NodeId : std::uint32_t {};

constexpr std::size_t index_of(NodeId id) noexcept { return static_cast<std::size_t>(id); }
constexpr NodeId make_node_id(std::size_t i) noexcept { return static_cast<NodeId>(i); }

/// Mutable tree used for parsing and for building edited snapshots.
struct TreeNode {
    NodeKind kind = NodeKind::Element;
    std::string name;
    std::string value;
    std::vector<std::pair<std::string, std::string>> attributes;
    std::vector<TreeNode> children;

    static TreeNode element(std::string name) {
        TreeNode n;
        n.kind = NodeKind::Element;
        n.name = std::move(name);
        return n;
    }
    static TreeNode text(std::string value) {
        TreeNode n;
        n.kind = NodeKind::Text;
        n.value = std::move(value);
        return n;
    }

    bool operator==(const TreeNode&) const = default;
};

class Document {
public:
    /// Flattens a tree whose root has kind Document.
    static Document from_tree(const TreeNode& root, std::string base_url) {
        Document doc;
        doc.base_url_ = std::move(base_url);
        doc.flatten(root, std::nullopt);
        std::uint32_t order = 0;
        doc.assign_order(make_node_id(0), order);
        doc.by_order_.resize(doc.nodes_.size());
        for (std::size_t i = 0; i < doc.nodes_.size(); ++i) doc.by_order_[doc.nodes_[i].order] = make_node_id(i);
        return doc;
    }

    NodeId root() const noexcept { return make_node_id(0); }
    const std::string& base_url() const noexcept { return base_url_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    bool contains(NodeId id) const noexcept { return index_of(id) < nodes_.size(); }

    NodeKind kind(NodeId id) const { return node(id).kind; }
    const std::string& name(NodeId id) const { return node(id).name; }
    const std::string& value(NodeId id) const { return node(id).value; }
    std::optional<NodeId> parent(NodeId id) const { return node(id).parent; }
    std::span<const NodeId> children(NodeId id) const { return node(id).children; }
    /// Attributes in the order they were written.
    std::span<const NodeId> attributes(NodeId id) const { return node(id).attributes; }
    std::uint32_t doc_order(NodeId id) const { return node(id).order; }
    /// One past the largest doc_order inside the subtree of `id` (attributes included).
    std::uint32_t subtree_end(NodeId id) const { return node(id).end; }
    /// All nodes sorted by doc_order.
    std::span<const NodeId> in_document_order() const { return by_order_; }
    NodeId at_order(std::uint32_t order) const { return by_order_.at(order); }

    bool is_element(NodeId id) const { return kind(id) == NodeKind::Element; }

    std::optional<std::string_view> attribute(NodeId element, std::string_view attr_name) const {
        for (NodeId a : attributes(element))
            if (name(a) == attr_name) return std::string_view(value(a));
        return std::nullopt;
    }

    /// The first element child of the document node.
    std::optional<NodeId> document_element() const {
        for (NodeId c : children(root()))
            if (is_element(c)) return c;
        return std::nullopt;
    }

    bool less(NodeId a, NodeId b) const { return doc_order(a) < doc_order(b); }

    void sort_in_document_order(std::vector<NodeId>& ids) const {
        std::sort(ids.begin(), ids.end(), [this](NodeId a, NodeId b) { return less(a, b); });
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    }

    /// Rebuilds the mutable form of the subtree rooted at `id`.
    TreeNode to_tree(NodeId id) const {
        const Node& n = node(id);
        TreeNode t;
        t.kind = n.kind;
        t.name = n.name;
        t.value = n.value;
        for (NodeId a : n.attributes) t.attributes.emplace_back(name(a), value(a));
        for (NodeId c : n.children) t.children.push_back(to_tree(c));
        return t;
    }
    TreeNode to_tree() const { return to_tree(root()); }

private:
    struct Node {
        NodeKind kind = NodeKind::Element;
        std::string name;
        std::string value;
        std::optional<NodeId> parent;
        std::vector<NodeId> children;
        std::vector<NodeId> attributes;
        std::uint32_t order = 0;
        std::uint32_t end = 0;
    };

    const Node& node(NodeId id) const { return nodes_.at(index_of(id)); }

    NodeId flatten(const TreeNode& t, std::optional<NodeId> parent) {
        NodeId id = make_node_id(nodes_.size());
        nodes_.push_back(Node{t.kind, t.name, t.value, parent, {}, {}, 0, 0});
        for (const auto& [attr_name, attr_value] : t.attributes) {
            NodeId a = make_node_id(nodes_.size());
            nodes_.push_back(Node{NodeKind::Attribute, attr_name, attr_value, id, {}, {}, 0, 0});
            nodes_[index_of(id)].attributes.push_back(a);
        }
        for (const TreeNode& c : t.children) {
            NodeId child = flatten(c, id);
            nodes_[index_of(id)].children.push_back(child);
        }
        return id;
    }

    void assign_order(NodeId id, std::uint32_t& order) {
        nodes_[index_of(id)].order = order++;
        std::vector<NodeId> attrs = nodes_[index_of(id)].attributes;
        std::stable_sort(attrs.begin(), attrs.end(),
                         [this](NodeId a, NodeId b) { return nodes_[index_of(a)].name < nodes_[index_of(b)].name; });
        for (NodeId a : attrs) {
            nodes_[index_of(a)].order = order++;
            nodes_[index_of(a)].end = order;
        }
        for (NodeId c : nodes_[index_of(id)].children) assign_order(c, order);
        nodes_[index_of(id)].end = order;
    }

    std::vector<Node> nodes_;
    std::vector<NodeId> by_order_;
    std::string base_url_;
};

struct ParseOptions {
    /// Treat HTML void elements (br, img, input, ...) as self-closing.
    bool html_void_elements = true;
};

namespace detail {

inline bool is_void_element(std::string_view name) {
    static constexpr std::string_view kVoid[] = {"area", "base", "br", "col", "embed", "hr", "img",
                                                 "input", "link", "meta", "param", "source", "track", "wbr"};
    auto lower = text::to_lower_ascii(name);
    return std::find(std::begin(kVoid), std::end(kVoid), lower) != std::end(kVoid);
}

class MarkupParser {
public:
    MarkupParser(std::string_view src, ParseOptions opts) : src_(src), opts_(opts) {}

    /// Parses a sequence of nodes until end of input.
    std::vector<TreeNode> parse_nodes() {
        std::vector<TreeNode> out;
        parse_content(out, nullptr);
        return out;
    }

    [[noreturn]] void fail(const std::string& msg) const { fail_at(msg, pos_); }

    [[noreturn]] void fail_at(const std::string& msg, std::size_t at) const {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i < at && i < src_.size(); ++i) {
            if (src_[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError(msg, line, col);
    }

private:
    bool eof() const { return pos_ >= src_.size(); }
    bool starts_with(std::string_view s) const { return src_.substr(pos_, s.size()) == s; }

    static bool is_name_start(char c) {
        return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':' || static_cast<unsigned char>(c) >= 0x80;
    }
    static bool is_name_char(char c) {
        return is_name_start(c) || std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '.';
    }

    std::string parse_name() {
        std::size_t start = pos_;
        if (eof() || !is_name_start(src_[pos_])) fail("expected a name");
        while (!eof() && is_name_char(src_[pos_])) ++pos_;
        return std::string(src_.substr(start, pos_ - start));
    }

    void skip_space() {
        while (!eof() && text::is_xml_space(src_[pos_])) ++pos_;
    }

    void skip_until(std::string_view terminator, const char* what) {
        auto end = src_.find(terminator, pos_);
        if (end == std::string_view::npos) fail(std::string("unterminated ") + what);
        pos_ = end + terminator.size();
    }

    void append_entity(std::string& out) {
        std::size_t at = pos_;
        auto semi = src_.find(';', pos_);
        if (semi == std::string_view::npos || semi - pos_ > 12) fail_at("malformed entity reference", at);
        std::string_view ent = src_.substr(pos_ + 1, semi - pos_ - 1);
        pos_ = semi + 1;
        if (ent == "amp") out += '&';
        else if (ent == "lt") out += '<';
        else if (ent == "gt") out += '>';
        else if (ent == "quot") out += '"';
        else if (ent == "apos") out += '\'';
        else if (ent.size() > 1 && ent[0] == '#') {
            bool hex = ent[1] == 'x' || ent[1] == 'X';
            std::string_view digits = ent.substr(hex ? 2 : 1);
            if (digits.empty()) fail_at("malformed character reference", at);
            char32_t cp = 0;
            for (char c : digits) {
                int d;
                if (c >= '0' && c <= '9') d = c - '0';
                else if (hex && c >= 'a' && c <= 'f') d = c - 'a' + 10;
                else if (hex && c >= 'A' && c <= 'F') d = c - 'A' + 10;
                else fail_at("malformed character reference", at);
                cp = cp * (hex ? 16 : 10) + static_cast<char32_t>(d);
                if (cp > 0x10FFFF) fail_at("character reference out of range", at);
            }
            text::append_utf8(out, cp);
        } else {
            fail_at("unknown entity '&" + std::string(ent) + ";'", at);
        }
    }

    static void add_text(std::vector<TreeNode>& out, std::string s, bool force) {
        if (!out.empty() && out.back().kind == NodeKind::Text) {
            out.back().value += s;
            return;
        }
        if (!s.empty() || force) out.push_back(TreeNode::text(std::move(s)));
    }

    // Parses children until the matching close tag of `open` (or EOF when null).
    void parse_content(std::vector<TreeNode>& out, const std::string* open) {
        std::string buf;
        auto flush = [&] {
            if (!buf.empty()) add_text(out, std::move(buf), false);
            buf.clear();
        };
        while (!eof()) {
            char c = src_[pos_];
            if (c == '&') {
                append_entity(buf);
            } else if (c != '<') {
                buf.push_back(c);
                ++pos_;
            } else if (starts_with("<!--")) {
                flush();
                skip_until("-->", "comment");
            } else if (starts_with("<![CDATA[")) {
                pos_ += 9;
                auto end = src_.find("]]>", pos_);
                if (end == std::string_view::npos) fail("unterminated CDATA section");
                buf.append(src_.substr(pos_, end - pos_));
                pos_ = end + 3;
                // An explicit CDATA section always yields a text node, even when empty.
                add_text(out, std::move(buf), true);
                buf.clear();
            } else if (starts_with("<!")) {
                flush();
                skip_until(">", "declaration");
            } else if (starts_with("<?")) {
                flush();
                skip_until("?>", "processing instruction");
            } else if (starts_with("</")) {
                flush();
                std::size_t at = pos_;
                pos_ += 2;
                std::string name = parse_name();
                skip_space();
                if (eof() || src_[pos_] != '>') fail("expected '>' in close tag");
                ++pos_;
                if (!open) fail_at("unexpected close tag </" + name + ">", at);
                if (name != *open) fail_at("mismatched close tag </" + name + ">, expected </" + *open + ">", at);
                return;
            } else {
                flush();
                out.push_back(parse_element());
            }
        }
        flush();
        if (open) fail("unclosed element <" + *open + ">");
    }

    TreeNode parse_element() {
        ++pos_;  // '<'
        TreeNode el = TreeNode::element(parse_name());
        for (;;) {
            std::size_t before = pos_;
            skip_space();
            if (eof()) fail("unterminated start tag <" + el.name + ">");
            if (starts_with("/>")) {
                pos_ += 2;
                return el;
            }
            if (src_[pos_] == '>') {
                ++pos_;
                break;
            }
            if (before == pos_) fail("expected whitespace before attribute");
            std::size_t attr_at = pos_;
            std::string attr = parse_name();
            skip_space();
            if (eof() || src_[pos_] != '=') fail("attribute '" + attr + "' has no value");
            ++pos_;
            skip_space();
            if (eof() || (src_[pos_] != '"' && src_[pos_] != '\'')) fail("attribute value must be quoted");
            char quote = src_[pos_++];
            std::string val;
            while (!eof() && src_[pos_] != quote) {
                if (src_[pos_] == '&') {
                    append_entity(val);
                } else if (src_[pos_] == '<') {
                    fail("'<' in attribute value");
                } else {
                    val.push_back(src_[pos_++]);
                }
            }
            if (eof()) fail("unterminated attribute value");
            ++pos_;
            for (const auto& existing : el.attributes)
                if (existing.first == attr) fail_at("duplicate attribute '" + attr + "'", attr_at);
            el.attributes.emplace_back(std::move(attr), std::move(val));
        }
        if (opts_.html_void_elements && is_void_element(el.name)) return el;
        parse_content(el.children, &el.name);
        return el;
    }

    std::string_view src_;
    ParseOptions opts_;
    std::size_t pos_ = 0;
};

} // namespace detail

/// Parses a full page. The markup must contain exactly one root element.
inline Document parse_document(std::string_view html, std::string base_url, ParseOptions opts = {}) {
    detail::MarkupParser parser(html, opts);
    std::vector<TreeNode> top = parser.parse_nodes();
    TreeNode root;
    root.kind = NodeKind::Document;
    for (auto& n : top) {
        if (n.kind == NodeKind::Text) {
            if (!text::is_blank(n.value)) parser.fail_at("text outside the root element", 0);
            continue;
        }
        if (!root.children.empty()) parser.fail_at("more than one root element", 0);
        root.children.push_back(std::move(n));
    }
    if (root.children.empty()) throw ParseError("no root element", 1, 1);
    return Document::from_tree(root, std::move(base_url));
}

/// Parses a snippet that may contain several top-level nodes. Blank text at
/// either end is dropped.
inline std::vector<TreeNode> parse_fragment(std::string_view html, ParseOptions opts = {}) {
    detail::MarkupParser parser(html, opts);
    std::vector<TreeNode> nodes = parser.parse_nodes();
    auto blank = [](const TreeNode& n) { return n.kind == NodeKind::Text && text::is_blank(n.value); };
    while (!nodes.empty() && blank(nodes.back())) nodes.pop_back();
    std::size_t lead = 0;
    while (lead < nodes.size() && blank(nodes[lead])) ++lead;
    nodes.erase(nodes.begin(), nodes.begin() + static_cast<std::ptrdiff_t>(lead));
    return nodes;
}

/// XPath string-value.
inline std::string string_value(const Document& doc, NodeId id) {
    switch (doc.kind(id)) {
    case NodeKind::Attribute:
    case NodeKind::Text:
        return doc.value(id);
    default:
        break;
    }
    std::string out;
    std::vector<NodeId> stack(doc.children(id).rbegin(), doc.children(id).rend());
    while (!stack.empty()) {
        NodeId n = stack.back();
        stack.pop_back();
        if (doc.kind(n) == NodeKind::Text) {
            out += doc.value(n);
        } else {
            auto kids = doc.children(n);
            stack.insert(stack.end(), kids.rbegin(), kids.rend());
        }
    }
    return out;
}

namespace detail {

inline void escape_markup(std::string& out, std::string_view s, bool in_attribute) {
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"':
            if (in_attribute) out += "&quot;";
            else out += c;
            break;
        default: out += c;
        }
    }
}

inline void serialize_into(std::string& out, const Document& doc, NodeId id) {
    switch (doc.kind(id)) {
    case NodeKind::Document:
        for (NodeId c : doc.children(id)) serialize_into(out, doc, c);
        return;
    case NodeKind::Text:
        if (doc.value(id).empty()) out += "<![CDATA[]]>";
        else escape_markup(out, doc.value(id), false);
        return;
    case NodeKind::Attribute:
        out += doc.name(id) + "=\"";
        escape_markup(out, doc.value(id), true);
        out += '"';
        return;
    case NodeKind::Element:
        out += '<' + doc.name(id);
        for (NodeId a : doc.attributes(id)) {
            out += ' ';
            serialize_into(out, doc, a);
        }
        if (doc.children(id).empty()) {
            out += "/>";
            return;
        }
        out += '>';
        for (NodeId c : doc.children(id)) serialize_into(out, doc, c);
        out += "</" + doc.name(id) + '>';
        return;
    }
}

} // namespace detail

/// Canonical markup; parsing it again yields an identical tree.
inline std::string serialize(const Document& doc, NodeId id) {
    std::string out;
    detail::serialize_into(out, doc, id);
    return out;
}
inline std::string serialize(const Document& doc) { return serialize(doc, doc.root()); }

/// Fingerprint of a snapshot's canonical serialization.
inline std::uint64_t snapshot_hash(const Document& doc) { return text::fnv1a(serialize(doc)); }

/// Location of a node as (kind, name, index among same-kind same-name siblings)
/// from the document node downwards. Stable across snapshots whose structure
/// above the node is unchanged.
struct NodePathEntry {
    NodeKind kind;
    std::string name;
    std::size_t index;
    bool operator==(const NodePathEntry&) const = default;
};
using NodePath = std::vector<NodePathEntry>;

inline NodePath path_of(const Document& doc, NodeId id) {
    NodePath path;
    NodeId cur = id;
    while (auto parent = doc.parent(cur)) {
        NodePathEntry e{doc.kind(cur), doc.name(cur), 0};
        if (e.kind != NodeKind::Attribute) {
            for (NodeId sib : doc.children(*parent)) {
                if (sib == cur) break;
                if (doc.kind(sib) == e.kind && doc.name(sib) == e.name) ++e.index;
            }
        }
        path.push_back(std::move(e));
        cur = *parent;
    }
    std::reverse(path.begin(), path.end());
    return path;
}

inline std::optional<NodeId> resolve_path(const Document& doc, const NodePath& path) {
    NodeId cur = doc.root();
    for (const NodePathEntry& e : path) {
        std::optional<NodeId> next;
        if (e.kind == NodeKind::Attribute) {
            if (doc.kind(cur) != NodeKind::Element) return std::nullopt;
            for (NodeId a : doc.attributes(cur))
                if (doc.name(a) == e.name) next = a;
        } else {
            std::size_t seen = 0;
            for (NodeId c : doc.children(cur)) {
                if (doc.kind(c) == e.kind && doc.name(c) == e.name) {
                    if (seen++ == e.index) {
                        next = c;
                        break;
                    }
                }
            }
        }
        if (!next) return std::nullopt;
        cur = *next;
    }
    return cur;
}

/// Child-index route from the root, used to locate a node inside TreeNode form.
inline std::vector<std::size_t> child_route(const Document& doc, NodeId id) {
    std::vector<std::size_t> route;
    NodeId cur = id;
    while (auto parent = doc.parent(cur)) {
        auto kids = doc.children(*parent);
        auto it = std::find(kids.begin(), kids.end(), cur);
        route.push_back(static_cast<std::size_t>(it - kids.begin()));
        cur = *parent;
    }
    std::reverse(route.begin(), route.end());
    return route;
}

inline TreeNode* follow_route(TreeNode& root, const std::vector<std::size_t>& route) {
    TreeNode* cur = &root;
    for (std::size_t i : route) {
        if (i >= cur->children.size()) return nullptr;
        cur = &cur->children[i];
    }
    return cur;
}

} // namespace oxpath
