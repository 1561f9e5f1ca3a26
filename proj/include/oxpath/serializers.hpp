#pragma once

// XML, JSON and CSV renderings of the output tree.

#include "oxpath/dom.hpp"
#include "oxpath/error.hpp"
#include "oxpath/output_tree.hpp"
#include "oxpath/text.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace oxpath {

struct SerializeOptions {
    bool mval = false;
    bool jsonarr = false;
    bool xmlcd = false;
    std::optional<std::string> rsent;
    std::optional<std::vector<std::string>> rsattrs;
    std::optional<std::vector<std::string>> hents;
};

inline const std::string kXmlDeclaration = "<?xml version=\"1.1\" encoding=\"UTF-8\"?>";

namespace detail {

inline void xml_text(std::string& out, std::string_view s) {
    for (char c : s) {
        auto u = static_cast<unsigned char>(c);
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        default:
            if ((u < 0x20 && c != '\t' && c != '\n') || u == 0x7F) {
                char buf[12];
                std::snprintf(buf, sizeof buf, "&#x%X;", u);
                out += buf;
            } else {
                out += c;
            }
        }
    }
}

inline void xml_cdata(std::string& out, std::string_view s) {
    out += "<![CDATA[";
    std::size_t pos = 0;
    for (std::size_t hit; (hit = s.find("]]>", pos)) != std::string_view::npos; pos = hit + 2) {
        out.append(s.substr(pos, hit + 2 - pos));
        out += "]]><![CDATA[";
    }
    out.append(s.substr(pos));
    out += "]]>";
}

inline void check_duplicate_attributes(const OutputNode& n) {
    std::map<std::string, int> seen;
    for (const auto& c : n.children)
        if (c.kind == OutputKind::Attribute && ++seen[c.name] == 2)
            throw SerializeError(SerializeErrorKind::DuplicateAttribute,
                                 "attribute '" + c.name + "' occurs more than once under '" +
                                     (n.kind == OutputKind::Root ? std::string("results") : n.name) +
                                     "'; use -mval to allow multi-valued attributes");
}

inline void xml_node(std::string& out, const OutputNode& n, std::size_t depth, const SerializeOptions& opts) {
    const std::string& name = n.kind == OutputKind::Root ? std::string("results") : n.name;
    std::string indent(depth * 2, ' ');
    out += indent + '<' + name;
    if (n.kind == OutputKind::Attribute) {
        out += '>';
        const std::string& v = *n.value;
        // Empty values keep an explicit text node so they stay distinct from empty records.
        if (opts.xmlcd || v.empty()) xml_cdata(out, v);
        else xml_text(out, v);
        out += "</" + name + ">\n";
        return;
    }
    if (!opts.mval) check_duplicate_attributes(n);
    if (n.children.empty()) {
        out += "/>\n";
        return;
    }
    out += ">\n";
    for (const auto& c : n.children) xml_node(out, c, depth + 1, opts);
    out += indent + "</" + name + ">\n";
}

} // namespace detail

inline std::string to_xml(const OutputNode& tree, const SerializeOptions& opts = {}) {
    std::string out = kXmlDeclaration + "\n";
    detail::xml_node(out, tree, 0, opts);
    return out;
}

namespace detail {
inline OutputNode from_xml_element(const Document& doc, NodeId el) {
    bool has_element = false;
    bool has_text = false;
    std::string text;
    for (NodeId c : doc.children(el)) {
        if (doc.is_element(c)) has_element = true;
        else {
            has_text = true;
            text += doc.value(c);
        }
    }
    if (!has_element && has_text) return OutputNode::attribute(doc.name(el), text);
    if (has_element && !text::is_blank(text))
        throw SerializeError(SerializeErrorKind::Path, "record '" + doc.name(el) + "' contains text");
    OutputNode rec = OutputNode::record(doc.name(el));
    for (NodeId c : doc.children(el))
        if (doc.is_element(c)) rec.add_child(from_xml_element(doc, c));
    return rec;
}
} // namespace detail

/// Reads XML produced by to_xml back into an output tree.
inline OutputNode from_xml(std::string_view xml) {
    Document doc = parse_document(xml, "about:output", ParseOptions{false});
    auto top = doc.document_element();
    if (!top || doc.name(*top) != "results")
        throw SerializeError(SerializeErrorKind::Path, "root element must be <results>");
    OutputNode tree = detail::from_xml_element(doc, *top);
    OutputNode root = OutputNode::root();
    root.children = std::move(tree.children);
    return root;
}

namespace detail {
inline nlohmann::ordered_json json_node(const OutputNode& n, const SerializeOptions& opts) {
    if (n.kind == OutputKind::Attribute) return *n.value;
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    std::vector<std::string> order;
    std::map<std::string, std::vector<const OutputNode*>> groups;
    for (const auto& c : n.children) {
        auto& g = groups[c.name];
        if (g.empty()) order.push_back(c.name);
        g.push_back(&c);
    }
    for (const auto& name : order) {
        const auto& g = groups[name];
        if (g.size() == 1) {
            obj[name] = json_node(*g[0], opts);
            continue;
        }
        std::size_t attrs = 0;
        for (const auto* c : g) attrs += c->kind == OutputKind::Attribute;
        if (attrs > 1 && !opts.mval)
            throw SerializeError(SerializeErrorKind::DuplicateAttribute,
                                 "attribute '" + name + "' occurs more than once; use -mval");
        if (!opts.jsonarr)
            throw SerializeError(SerializeErrorKind::DuplicateKey,
                                 "several siblings named '" + name + "'; -jsonarr must be set to emit them as an array");
        auto arr = nlohmann::ordered_json::array();
        for (const auto* c : g) arr.push_back(json_node(*c, opts));
        obj[name] = std::move(arr);
    }
    return obj;
}
} // namespace detail

inline std::string to_json(const OutputNode& tree, const SerializeOptions& opts = {}) {
    return detail::json_node(tree, opts).dump(2) + "\n";
}

// --- CSV --------------------------------------------------------------------------

/// RFC 4180 field quoting.
inline std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

inline std::string csv_row(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += csv_field(fields[i]);
    }
    return out + '\n';
}

/// Parses CSV written by csv_row. Used to read results back.
inline std::vector<std::vector<std::string>> parse_csv(std::string_view s) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false, any = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (quoted) {
            if (c == '"' && i + 1 < s.size() && s[i + 1] == '"') field += s[++i];
            else if (c == '"') quoted = false;
            else field += c;
        } else if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\n') {
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
            any = false;
        } else {
            field += c;
            any = true;
        }
    }
    if (any) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace detail {
inline std::string cell_value(const std::vector<std::string>& values, bool mval) {
    if (values.empty()) return {};
    return mval ? text::join_escaped(values) : values.front();
}
} // namespace detail

/// Streaming rscsv writer: one row per closed `rsent` record, holding only the
/// records that are currently open.
class RsCsvWriter : public OutputSink {
public:
    RsCsvWriter(std::ostream& out, const SerializeOptions& opts) : out_(out), mval_(opts.mval) {
        if (!opts.rsent || opts.rsent->empty()) throw ConfigError("rscsv requires -rsent");
        if (!opts.rsattrs || opts.rsattrs->empty()) throw ConfigError("rscsv requires -rsattrs");
        rsent_ = *opts.rsent;
        attrs_ = *opts.rsattrs;
        out_ << csv_row(attrs_);
    }

    void begin_record(const std::string& name) override {
        stack_.push_back(Open{name == rsent_, {}});
        if (stack_.back().selected) stack_.back().cells.resize(attrs_.size());
        peak_open_ = std::max(peak_open_, stack_.size());
    }

    void attribute(const std::string& name, const std::string& value) override {
        if (stack_.empty() || !stack_.back().selected) return;
        for (std::size_t i = 0; i < attrs_.size(); ++i)
            if (attrs_[i] == name) stack_.back().cells[i].push_back(value);
    }

    void end_record() override {
        if (stack_.empty()) throw ProtocolError("end_record without a matching begin_record");
        if (stack_.back().selected) {
            std::vector<std::string> row;
            for (const auto& cell : stack_.back().cells) row.push_back(detail::cell_value(cell, mval_));
            out_ << csv_row(row);
            ++rows_;
        }
        stack_.pop_back();
    }

    std::size_t rows() const noexcept { return rows_; }
    /// Deepest nesting of open records seen so far; bounds the writer's memory.
    std::size_t peak_open_records() const noexcept { return peak_open_; }

private:
    struct Open {
        bool selected;
        std::vector<std::vector<std::string>> cells;
    };
    std::ostream& out_;
    bool mval_;
    std::string rsent_;
    std::vector<std::string> attrs_;
    std::vector<Open> stack_;
    std::size_t rows_ = 0;
    std::size_t peak_open_ = 0;
};

inline std::string to_rscsv(const OutputNode& tree, const SerializeOptions& opts) {
    std::ostringstream ss;
    RsCsvWriter w(ss, opts);
    replay_tree(tree, w);
    return ss.str();
}

// --- hcsv --------------------------------------------------------------------------

namespace detail {

inline bool is_marker_name(std::string_view s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
    return true;
}

inline std::vector<std::string> parse_hents_path(const std::string& path) {
    auto segs = text::split(path, '/');
    for (const auto& s : segs)
        if (!is_marker_name(s))
            throw SerializeError(SerializeErrorKind::Path,
                                 "hents path \"" + path + "\" must be of the form a/b/c with plain names");
    return segs;
}

// Records reached from `from` by following `path` through records.
inline void follow(const OutputNode& from, const std::vector<std::string>& path, std::size_t i,
                   std::vector<const OutputNode*>& out) {
    if (i == path.size()) {
        out.push_back(&from);
        return;
    }
    for (const auto& c : from.children)
        if (c.kind == OutputKind::Record && c.name == path[i]) follow(c, path, i + 1, out);
}

// Attribute values of one record, keyed by '_'-joined path below it. Records on
// `stop` (the next level's path) are not entered.
inline void collect_attributes(const OutputNode& rec, const std::vector<std::string>* stop, std::size_t depth,
                               const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
    for (const auto& c : rec.children) {
        std::string key = prefix.empty() ? c.name : prefix + "_" + c.name;
        if (c.kind == OutputKind::Attribute) {
            out.emplace_back(key, *c.value);
            continue;
        }
        bool on_stop = stop && depth < stop->size() && (*stop)[depth] == c.name;
        if (on_stop && depth + 1 == stop->size()) continue;
        collect_attributes(c, on_stop ? stop : nullptr, depth + 1, key, out);
    }
}

struct HcsvLevel {
    std::vector<std::string> path;
    std::string prefix;              // '_'-joined path, prepended to attribute columns
    std::vector<std::string> columns;  // attribute columns in first-occurrence order
    std::map<std::string, std::size_t> column_index;
    std::size_t next_id = 0;
};

struct HcsvRecordRow {
    std::size_t id;
    std::vector<std::vector<std::string>> cells;
};

} // namespace detail

/// Flattens the record hierarchy named by `opts.hents` into one relation.
/// IDs are 1-based and sequential per level across the whole tree; a parent
/// without children still yields one row with empty child columns.
inline std::string to_hcsv(const OutputNode& tree, const SerializeOptions& opts) {
    if (!opts.hents || opts.hents->empty()) throw ConfigError("hcsv requires -hents");
    std::vector<detail::HcsvLevel> levels;
    for (const auto& p : *opts.hents) {
        detail::HcsvLevel lvl;
        lvl.path = detail::parse_hents_path(p);
        for (std::size_t i = 0; i < lvl.path.size(); ++i) lvl.prefix += (i ? "_" : "") + lvl.path[i];
        levels.push_back(std::move(lvl));
    }

    // Depth-first walk building rows as vectors of per-level cells.
    struct Partial {
        std::vector<std::string> ids;
        std::vector<std::vector<std::pair<std::string, std::string>>> attrs;
    };
    std::vector<Partial> rows;
    Partial current;

    std::function<void(const OutputNode&, std::size_t)> visit = [&](const OutputNode& parent, std::size_t k) {
        std::vector<const OutputNode*> recs;
        detail::follow(parent, levels[k].path, 0, recs);
        if (recs.empty()) {
            if (k > 0) rows.push_back(current);
            return;
        }
        for (const OutputNode* r : recs) {
            auto& lvl = levels[k];
            std::vector<std::pair<std::string, std::string>> attrs;
            const std::vector<std::string>* stop = k + 1 < levels.size() ? &levels[k + 1].path : nullptr;
            detail::collect_attributes(*r, stop, 0, "", attrs);
            for (const auto& [key, v] : attrs) {
                std::string col = lvl.prefix + "_" + key;
                if (!lvl.column_index.count(col)) {
                    lvl.column_index[col] = lvl.columns.size();
                    lvl.columns.push_back(col);
                }
            }
            current.ids.push_back(std::to_string(++lvl.next_id));
            current.attrs.push_back(std::move(attrs));
            if (k + 1 < levels.size()) visit(*r, k + 1);
            else rows.push_back(current);
            current.ids.pop_back();
            current.attrs.pop_back();
        }
    };
    visit(tree, 0);

    std::vector<std::string> header;
    for (const auto& lvl : levels) {
        header.push_back(lvl.path.back() + "_id");
        header.insert(header.end(), lvl.columns.begin(), lvl.columns.end());
    }
    std::string out = csv_row(header);
    for (const auto& row : rows) {
        std::vector<std::string> fields;
        for (std::size_t k = 0; k < levels.size(); ++k) {
            const auto& lvl = levels[k];
            std::vector<std::vector<std::string>> cells(lvl.columns.size());
            bool present = k < row.ids.size();
            fields.push_back(present ? row.ids[k] : std::string{});
            if (present)
                for (const auto& [key, v] : row.attrs[k]) cells[lvl.column_index.at(lvl.prefix + "_" + key)].push_back(v);
            for (const auto& c : cells) fields.push_back(detail::cell_value(c, opts.mval));
        }
        out += csv_row(fields);
    }
    return out;
}

} // namespace oxpath
