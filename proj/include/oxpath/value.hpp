#pragma once

// XPath values and the 1.0 coercion rules.

#include "oxpath/dom.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace oxpath {

/// Node sequence in document order without duplicates.
using NodeSet = std::vector<NodeId>;

/// Sequence of atomic strings, produced by ("a", "b") sequence syntax.
struct StringSeq {
    std::vector<std::string> items;
    bool operator==(const StringSeq&) const = default;
};

using Value = std::variant<NodeSet, std::string, double, bool, StringSeq>;

inline bool is_node_set(const Value& v) { return std::holds_alternative<NodeSet>(v); }

/// XPath 1.0 number-to-string conversion.
inline std::string format_xpath_number(double d) {
    if (std::isnan(d)) return "NaN";
    if (std::isinf(d)) return d > 0 ? "Infinity" : "-Infinity";
    if (d == 0) return "0";
    char buf[400];
    auto res = std::to_chars(buf, buf + sizeof buf, d, std::chars_format::fixed);
    return std::string(buf, res.ptr);
}

/// XPath 1.0 string-to-number conversion; anything malformed is NaN.
inline double parse_xpath_number(std::string_view s) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::size_t b = 0, e = s.size();
    while (b < e && text::is_xml_space(s[b])) ++b;
    while (e > b && text::is_xml_space(s[e - 1])) --e;
    s = s.substr(b, e - b);
    if (s.empty()) return nan;
    bool neg = false;
    if (s[0] == '-') {
        neg = true;
        s.remove_prefix(1);
    }
    std::size_t i = 0, digits = 0;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i, ++digits;
    if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i, ++digits;
    }
    if (i != s.size() || digits == 0) return nan;
    std::string buf = (s[0] == '.' ? "0" : "") + std::string(s);
    double v = 0;
    std::from_chars(buf.data(), buf.data() + buf.size(), v);
    return neg ? -v : v;
}

inline std::string to_xpath_string(const Value& v, const Document& doc) {
    switch (v.index()) {
    case 0: {
        const auto& ns = std::get<NodeSet>(v);
        return ns.empty() ? std::string{} : string_value(doc, ns.front());
    }
    case 1: return std::get<std::string>(v);
    case 2: return format_xpath_number(std::get<double>(v));
    case 3: return std::get<bool>(v) ? "true" : "false";
    default: {
        const auto& seq = std::get<StringSeq>(v);
        return seq.items.empty() ? std::string{} : seq.items.front();
    }
    }
}

inline double to_xpath_number(const Value& v, const Document& doc) {
    switch (v.index()) {
    case 2: return std::get<double>(v);
    case 3: return std::get<bool>(v) ? 1.0 : 0.0;
    default: return parse_xpath_number(to_xpath_string(v, doc));
    }
}

inline bool to_xpath_boolean(const Value& v) {
    switch (v.index()) {
    case 0: return !std::get<NodeSet>(v).empty();
    case 1: return !std::get<std::string>(v).empty();
    case 2: {
        double d = std::get<double>(v);
        return d != 0 && !std::isnan(d);
    }
    case 3: return std::get<bool>(v);
    default: return !std::get<StringSeq>(v).items.empty();
    }
}

} // namespace oxpath
