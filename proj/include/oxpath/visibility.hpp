#pragma once

// Attribute/style based visibility used by is-visible() and the simulated browser.

#include "oxpath/dom.hpp"
#include "oxpath/text.hpp"

#include <string>

namespace oxpath {

namespace detail {

inline bool element_hides(const Document& doc, NodeId el) {
    if (doc.attribute(el, "hidden")) return true;
    if (auto style = doc.attribute(el, "style")) {
        std::string compact;
        for (char c : *style)
            if (!text::is_xml_space(c)) compact.push_back(c);
        compact = text::to_lower_ascii(compact);
        if (compact.find("display:none") != std::string::npos || compact.find("visibility:hidden") != std::string::npos)
            return true;
    }
    if (auto cls = doc.attribute(el, "class")) {
        for (auto token : text::split_whitespace(*cls))
            if (token == "disabled-hidden") return true;
    }
    return false;
}

} // namespace detail

/// False iff the node or an ancestor element is hidden by the `hidden`
/// attribute, an inline display:none / visibility:hidden style, or the
/// `disabled-hidden` class token.
inline bool is_visible(const Document& doc, NodeId node) {
    std::optional<NodeId> cur = node;
    while (cur) {
        if (doc.is_element(*cur) && detail::element_hides(doc, *cur)) return false;
        cur = doc.parent(*cur);
    }
    return true;
}

} // namespace oxpath
