#pragma once

// Evaluator for marker-free, action-free expressions over a single Document.

#include "oxpath/ast.hpp"
#include "oxpath/dom.hpp"
#include "oxpath/error.hpp"
#include "oxpath/text.hpp"
#include "oxpath/url.hpp"
#include "oxpath/value.hpp"
#include "oxpath/visibility.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

namespace oxpath {

struct EvalContext {
    const Document* doc = nullptr;
    NodeId node{};
    std::size_t position = 1;
    std::size_t size = 1;
};

namespace xpath {

/// Nodes on `axis` from `node`, in axis order (reverse axes nearest first).
inline std::vector<NodeId> axis_nodes(const Document& doc, Axis axis, NodeId node) {
    std::vector<NodeId> out;
    auto append_descendants = [&](NodeId n) {
        std::vector<NodeId> stack(doc.children(n).rbegin(), doc.children(n).rend());
        while (!stack.empty()) {
            NodeId c = stack.back();
            stack.pop_back();
            out.push_back(c);
            auto kids = doc.children(c);
            stack.insert(stack.end(), kids.rbegin(), kids.rend());
        }
    };
    switch (axis) {
    case Axis::Child:
        out.assign(doc.children(node).begin(), doc.children(node).end());
        break;
    case Axis::Descendant:
        append_descendants(node);
        break;
    case Axis::DescendantOrSelf:
        out.push_back(node);
        append_descendants(node);
        break;
    case Axis::Self:
        out.push_back(node);
        break;
    case Axis::Parent:
        if (auto p = doc.parent(node)) out.push_back(*p);
        break;
    case Axis::AncestorOrSelf:
        out.push_back(node);
        [[fallthrough]];
    case Axis::Ancestor:
        for (auto p = doc.parent(node); p; p = doc.parent(*p)) out.push_back(*p);
        break;
    case Axis::FollowingSibling:
    case Axis::PrecedingSibling: {
        auto parent = doc.parent(node);
        if (!parent || doc.kind(node) == NodeKind::Attribute) break;
        auto sibs = doc.children(*parent);
        auto it = std::find(sibs.begin(), sibs.end(), node);
        if (axis == Axis::FollowingSibling) {
            out.assign(it + 1, sibs.end());
        } else {
            for (auto r = std::make_reverse_iterator(it); r != sibs.rend(); ++r) out.push_back(*r);
        }
        break;
    }
    case Axis::Following: {
        auto all = doc.in_document_order();
        for (std::uint32_t o = doc.subtree_end(node); o < all.size(); ++o)
            if (doc.kind(all[o]) != NodeKind::Attribute) out.push_back(all[o]);
        break;
    }
    case Axis::Preceding: {
        auto all = doc.in_document_order();
        std::uint32_t self = doc.doc_order(node);
        // Ancestors (and, for attributes, the owner) contain `node` in their range.
        for (std::uint32_t o = self; o-- > 0;) {
            NodeId n = all[o];
            if (doc.kind(n) == NodeKind::Attribute) continue;
            if (doc.subtree_end(n) > self) continue;
            out.push_back(n);
        }
        break;
    }
    case Axis::Attribute:
        if (doc.is_element(node)) {
            out.assign(doc.attributes(node).begin(), doc.attributes(node).end());
            std::sort(out.begin(), out.end(), [&](NodeId a, NodeId b) { return doc.less(a, b); });
        }
        break;
    }
    return out;
}

inline bool is_form_field(std::string_view name) {
    return name == "input" || name == "textarea" || name == "select" || name == "button";
}

inline bool matches_test(const Document& doc, Axis axis, const NodeTest& test, NodeId n) {
    NodeKind principal = axis == Axis::Attribute ? NodeKind::Attribute : NodeKind::Element;
    NodeKind k = doc.kind(n);
    switch (test.kind) {
    case NodeTestKind::Name: return k == principal && doc.name(n) == test.name;
    case NodeTestKind::Wildcard: return k == principal;
    case NodeTestKind::Text: return k == NodeKind::Text;
    case NodeTestKind::Node: return true;
    case NodeTestKind::Comment:
    case NodeTestKind::ProcessingInstruction: return false;
    case NodeTestKind::Field: return k == NodeKind::Element && is_form_field(doc.name(n));
    }
    return false;
}

inline Value eval(const Expr& expr, const EvalContext& ctx);

/// Filters `nodes` (given in axis order) by one predicate.
inline std::vector<NodeId> apply_predicate(const Document& doc, const std::vector<NodeId>& nodes, const Predicate& pred) {
    std::vector<NodeId> kept;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        EvalContext c{&doc, nodes[i], i + 1, nodes.size()};
        Value v = eval(*pred.expr, c);
        if (pred.optional) {
            kept.push_back(nodes[i]);
            continue;
        }
        bool keep = std::holds_alternative<double>(v) ? std::get<double>(v) == static_cast<double>(i + 1)
                                                       : to_xpath_boolean(v);
        if (keep) kept.push_back(nodes[i]);
    }
    return kept;
}

/// Candidates for one axis step from `node` after node test and the given
/// predicates, still in axis order.
inline std::vector<NodeId> step_candidates(const Document& doc, NodeId node, Axis axis, const NodeTest& test,
                                           const std::vector<const Predicate*>& preds) {
    std::vector<NodeId> nodes;
    for (NodeId n : axis_nodes(doc, axis, node))
        if (matches_test(doc, axis, test, n)) nodes.push_back(n);
    for (const Predicate* p : preds) nodes = apply_predicate(doc, nodes, *p);
    return nodes;
}

// --- operators -----------------------------------------------------------------

/// `~=`: true iff `token` equals one whitespace-separated token of `list`.
inline bool word_contains(std::string_view list, std::string_view token) {
    for (auto t : text::split_whitespace(list))
        if (t == token) return true;
    return false;
}

/// `#=`: plain substring containment.
inline bool substring_contains(std::string_view haystack, std::string_view needle) {
    return haystack.find(needle) != std::string_view::npos;
}

namespace detail {

inline bool compare_numbers(BinaryOp op, double a, double b) {
    switch (op) {
    case BinaryOp::Eq: return a == b;
    case BinaryOp::Ne: return a != b;
    case BinaryOp::Lt: return a < b;
    case BinaryOp::Le: return a <= b;
    case BinaryOp::Gt: return a > b;
    case BinaryOp::Ge: return a >= b;
    default: return false;
    }
}

inline bool is_equality(BinaryOp op) { return op == BinaryOp::Eq || op == BinaryOp::Ne; }

// String atoms of a node-set or string sequence.
inline std::vector<std::string> atoms(const Value& v, const Document& doc) {
    std::vector<std::string> out;
    if (auto* ns = std::get_if<NodeSet>(&v)) {
        for (NodeId n : *ns) out.push_back(string_value(doc, n));
    } else {
        out = std::get<StringSeq>(v).items;
    }
    return out;
}

inline bool is_multi(const Value& v) { return std::holds_alternative<NodeSet>(v) || std::holds_alternative<StringSeq>(v); }

inline bool compare_scalars(BinaryOp op, const Value& a, const Value& b, const Document& doc) {
    if (is_equality(op)) {
        bool eq;
        if (std::holds_alternative<bool>(a) || std::holds_alternative<bool>(b))
            eq = to_xpath_boolean(a) == to_xpath_boolean(b);
        else if (std::holds_alternative<double>(a) || std::holds_alternative<double>(b))
            eq = to_xpath_number(a, doc) == to_xpath_number(b, doc);
        else
            eq = to_xpath_string(a, doc) == to_xpath_string(b, doc);
        return op == BinaryOp::Eq ? eq : !eq;
    }
    return compare_numbers(op, to_xpath_number(a, doc), to_xpath_number(b, doc));
}

// XPath 1.0 comparison with existential semantics for node-sets.
inline bool compare(BinaryOp op, const Value& a, const Value& b, const Document& doc) {
    if (is_multi(a) && is_multi(b)) {
        auto xs = atoms(a, doc), ys = atoms(b, doc);
        for (const auto& x : xs)
            for (const auto& y : ys) {
                bool r = is_equality(op) ? ((x == y) == (op == BinaryOp::Eq))
                                         : compare_numbers(op, parse_xpath_number(x), parse_xpath_number(y));
                if (r) return true;
            }
        return false;
    }
    if (is_multi(a) || is_multi(b)) {
        bool multi_left = is_multi(a);
        const Value& set = multi_left ? a : b;
        const Value& other = multi_left ? b : a;
        if (std::holds_alternative<bool>(other)) {
            Value sb = to_xpath_boolean(set);
            return multi_left ? compare_scalars(op, sb, other, doc) : compare_scalars(op, other, sb, doc);
        }
        for (const auto& x : atoms(set, doc)) {
            Value xv;
            if (std::holds_alternative<double>(other)) xv = parse_xpath_number(x);
            else xv = x;
            if (multi_left ? compare_scalars(op, xv, other, doc) : compare_scalars(op, other, xv, doc)) return true;
        }
        return false;
    }
    return compare_scalars(op, a, b, doc);
}

inline double xpath_round(double d) {
    if (std::isnan(d) || std::isinf(d)) return d;
    if (d < 0 && d >= -0.5) return -0.0;
    return std::floor(d + 0.5);
}

inline std::u32string case_map(std::u32string s, bool upper) {
    for (char32_t& c : s) {
        if (upper) {
            if ((c >= U'a' && c <= U'z') || (c >= 0xE0 && c <= 0xFE && c != 0xF7)) c -= 0x20;
        } else {
            if ((c >= U'A' && c <= U'Z') || (c >= 0xC0 && c <= 0xDE && c != 0xD7)) c += 0x20;
        }
    }
    return s;
}

static_assert(sizeof(wchar_t) == sizeof(char32_t), "wide regex relies on 32-bit wchar_t");

inline std::wstring widen(std::string_view s) {
    auto u = text::decode_utf8(s);
    return std::wstring(u.begin(), u.end());
}

inline std::string narrow(std::wstring_view w) {
    std::string out;
    for (wchar_t c : w) text::append_utf8(out, static_cast<char32_t>(c));
    return out;
}

inline std::wregex compile_regex(const std::string& pattern, const std::string& flags) {
    auto opts = std::regex::ECMAScript;
    for (char f : flags) {
        if (f == 'i') opts |= std::regex::icase;
        else if (f == 'm') opts |= std::regex::multiline;
        else throw EvalError(EvalErrorKind::BadRegex, std::string("unsupported regex flag '") + f + "'");
    }
    try {
        return std::wregex(widen(pattern), opts);
    } catch (const std::regex_error& e) {
        throw EvalError(EvalErrorKind::BadRegex, "invalid regular expression \"" + pattern + "\": " + e.what());
    }
}

inline std::string regex_replace_xpath(const std::string& input, const std::string& pattern,
                                       const std::string& replacement, const std::string& flags) {
    std::wregex re = compile_regex(pattern, flags);
    if (std::regex_match(std::wstring(), re))
        throw EvalError(EvalErrorKind::BadRegex, "pattern \"" + pattern + "\" matches the empty string");
    std::wstring in = widen(input), rep = widen(replacement), out;
    std::size_t groups = re.mark_count();
    auto expand = [&](const std::wsmatch& m) {
        for (std::size_t i = 0; i < rep.size(); ++i) {
            wchar_t c = rep[i];
            if (c == L'\\') {
                if (i + 1 < rep.size() && (rep[i + 1] == L'\\' || rep[i + 1] == L'$')) {
                    out.push_back(rep[++i]);
                    continue;
                }
                throw EvalError(EvalErrorKind::BadRegex, "invalid '\\' in replacement string");
            }
            if (c == L'$') {
                if (i + 1 >= rep.size() || rep[i + 1] < L'0' || rep[i + 1] > L'9')
                    throw EvalError(EvalErrorKind::BadRegex, "invalid '$' in replacement string");
                std::size_t n = static_cast<std::size_t>(rep[++i] - L'0');
                // Take further digits only while they still name an existing group.
                while (i + 1 < rep.size() && rep[i + 1] >= L'0' && rep[i + 1] <= L'9' &&
                       n * 10 + static_cast<std::size_t>(rep[i + 1] - L'0') <= groups)
                    n = n * 10 + static_cast<std::size_t>(rep[++i] - L'0');
                if (n <= groups && m[n].matched) out += m[n].str();
                continue;
            }
            out.push_back(c);
        }
    };
    auto begin = std::wsregex_iterator(in.begin(), in.end(), re);
    std::size_t last = 0;
    for (auto it = begin; it != std::wsregex_iterator(); ++it) {
        const auto& m = *it;
        auto start = static_cast<std::size_t>(m.position(0));
        out.append(in, last, start - last);
        expand(m);
        last = start + static_cast<std::size_t>(m.length(0));
    }
    out.append(in, last, std::wstring::npos);
    return narrow(out);
}

inline bool regex_matches_xpath(const std::string& input, const std::string& pattern, const std::string& flags) {
    std::wregex re = compile_regex(pattern, flags);
    return std::regex_search(widen(input), re);
}

inline NodeSet merge(const Document& doc, NodeSet a, const NodeSet& b) {
    a.insert(a.end(), b.begin(), b.end());
    doc.sort_in_document_order(a);
    return a;
}

} // namespace detail

// --- function library ---------------------------------------------------------

inline Value call_function(const std::string& name, const std::vector<Value>& args, const EvalContext& ctx) {
    const Document& doc = *ctx.doc;
    auto arity = [&](std::size_t lo, std::size_t hi) {
        if (args.size() < lo || args.size() > hi)
            throw EvalError(EvalErrorKind::Arity, name + "() called with " + std::to_string(args.size()) +
                                                      " argument(s)");
    };
    auto str = [&](std::size_t i) { return to_xpath_string(args[i], doc); };
    auto num = [&](std::size_t i) { return to_xpath_number(args[i], doc); };
    // Single optional argument defaults to the context node.
    auto str_or_context = [&]() { return args.empty() ? string_value(doc, ctx.node) : str(0); };
    auto node_set = [&](std::size_t i) -> const NodeSet& {
        if (auto* ns = std::get_if<NodeSet>(&args[i])) return *ns;
        throw EvalError(EvalErrorKind::Type, name + "() expects a node-set argument");
    };

    if (name == "position") {
        arity(0, 0);
        return static_cast<double>(ctx.position);
    }
    if (name == "last") {
        arity(0, 0);
        return static_cast<double>(ctx.size);
    }
    if (name == "count") {
        arity(1, 1);
        if (auto* seq = std::get_if<StringSeq>(&args[0])) return static_cast<double>(seq->items.size());
        return static_cast<double>(node_set(0).size());
    }
    if (name == "string") {
        arity(0, 1);
        return str_or_context();
    }
    if (name == "concat") {
        if (args.size() < 2) arity(2, 2);
        std::string out;
        for (std::size_t i = 0; i < args.size(); ++i) out += str(i);
        return out;
    }
    if (name == "starts-with") {
        arity(2, 2);
        return str(0).rfind(str(1), 0) == 0;
    }
    if (name == "contains") {
        arity(2, 2);
        return substring_contains(str(0), str(1));
    }
    if (name == "substring-before" || name == "substring-after") {
        arity(2, 2);
        std::string s = str(0), t = str(1);
        auto p = s.find(t);
        if (p == std::string::npos) return std::string{};
        return name == "substring-before" ? s.substr(0, p) : s.substr(p + t.size());
    }
    if (name == "substring") {
        arity(2, 3);
        std::u32string s = text::decode_utf8(str(0));
        double start = detail::xpath_round(num(1));
        double end = args.size() == 3 ? start + detail::xpath_round(num(2)) : INFINITY;
        std::u32string out;
        for (std::size_t i = 0; i < s.size(); ++i) {
            double p = static_cast<double>(i + 1);
            if (p >= start && p < end) out.push_back(s[i]);
        }
        return text::encode_utf8(out);
    }
    if (name == "string-length") {
        arity(0, 1);
        return static_cast<double>(text::decode_utf8(str_or_context()).size());
    }
    if (name == "normalize-space") {
        arity(0, 1);
        std::string in = str_or_context(), out;
        for (auto t : text::split_whitespace(in)) {
            if (!out.empty()) out.push_back(' ');
            out.append(t);
        }
        return out;
    }
    if (name == "translate") {
        arity(3, 3);
        auto s = text::decode_utf8(str(0)), from = text::decode_utf8(str(1)), to = text::decode_utf8(str(2));
        std::u32string out;
        for (char32_t c : s) {
            auto p = from.find(c);
            if (p == std::u32string::npos) out.push_back(c);
            else if (p < to.size()) out.push_back(to[p]);
        }
        return text::encode_utf8(out);
    }
    if (name == "boolean") {
        arity(1, 1);
        return to_xpath_boolean(args[0]);
    }
    if (name == "not") {
        arity(1, 1);
        return !to_xpath_boolean(args[0]);
    }
    if (name == "true" || name == "false") {
        arity(0, 0);
        return name == "true";
    }
    if (name == "number") {
        arity(0, 1);
        return args.empty() ? parse_xpath_number(string_value(doc, ctx.node)) : num(0);
    }
    if (name == "sum") {
        arity(1, 1);
        double total = 0;
        for (const auto& a : detail::atoms(args[0], doc)) total += parse_xpath_number(a);
        if (!detail::is_multi(args[0])) throw EvalError(EvalErrorKind::Type, "sum() expects a node-set argument");
        return total;
    }
    if (name == "floor") {
        arity(1, 1);
        return std::floor(num(0));
    }
    if (name == "ceiling") {
        arity(1, 1);
        return std::ceil(num(0));
    }
    if (name == "round") {
        arity(1, 1);
        return detail::xpath_round(num(0));
    }
    if (name == "string-join") {
        arity(1, 2);
        std::vector<std::string> items =
            detail::is_multi(args[0]) ? detail::atoms(args[0], doc) : std::vector<std::string>{str(0)};
        std::string sep = args.size() == 2 ? str(1) : std::string{};
        std::string out;
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (i) out += sep;
            out += items[i];
        }
        return out;
    }
    if (name == "replace") {
        arity(3, 4);
        return detail::regex_replace_xpath(str(0), str(1), str(2), args.size() == 4 ? str(3) : std::string{});
    }
    if (name == "matches") {
        arity(2, 3);
        return detail::regex_matches_xpath(str(0), str(1), args.size() == 3 ? str(2) : std::string{});
    }
    if (name == "upper-case" || name == "lower-case") {
        arity(1, 1);
        return text::encode_utf8(detail::case_map(text::decode_utf8(str(0)), name == "upper-case"));
    }
    if (name == "qualify-url") {
        arity(0, 1);
        std::string ref = text::trim(str_or_context());
        return url::resolve(doc.base_url(), ref);
    }
    if (name == "current-url") {
        arity(0, 0);
        return doc.base_url();
    }
    if (name == "is-visible" || name == "is-invisible") {
        arity(0, 1);
        bool visible;
        if (args.empty()) {
            visible = is_visible(doc, ctx.node);
        } else {
            const NodeSet& ns = node_set(0);
            visible = !ns.empty() && is_visible(doc, ns.front());
        }
        return name == "is-visible" ? visible : !visible;
    }
    throw EvalError(EvalErrorKind::UnknownFunction, "unknown function " + name + "()");
}

// --- expressions ----------------------------------------------------------------

inline NodeSet eval_path(const PathExpr& path, const EvalContext& ctx) {
    const Document& doc = *ctx.doc;
    NodeSet current;
    switch (path.start) {
    case PathStart::Context: current = {ctx.node}; break;
    case PathStart::Root: current = {doc.root()}; break;
    case PathStart::Filter: {
        Value v = eval(*path.filter, ctx);
        auto* ns = std::get_if<NodeSet>(&v);
        if (!ns) throw EvalError(EvalErrorKind::Type, "predicates and steps require a node-set");
        current = std::move(*ns);
        for (const auto& pr : path.filter_predicates) current = apply_predicate(doc, current, pr);
        break;
    }
    }
    for (const Step& step : path.steps) {
        if (step.kind != StepKind::Axis)
            throw EvalError(EvalErrorKind::Unsupported, "actions and Kleene stars need the wrapper engine");
        std::vector<const Predicate*> preds;
        for (const auto& m : step.modifiers) {
            if (auto* p = std::get_if<Predicate>(&m)) preds.push_back(p);
            else throw EvalError(EvalErrorKind::Unsupported, "extraction markers need the wrapper engine");
        }
        NodeSet next;
        for (NodeId n : current) {
            auto found = step_candidates(doc, n, step.axis, step.test, preds);
            next.insert(next.end(), found.begin(), found.end());
        }
        doc.sort_in_document_order(next);
        current = std::move(next);
    }
    return current;
}

inline Value eval(const Expr& expr, const EvalContext& ctx) {
    const Document& doc = *ctx.doc;
    if (auto* lit = expr.as<Literal>()) return lit->value;
    if (auto* n = expr.as<Number>()) return n->value;
    if (auto* p = expr.as<PathExpr>()) return eval_path(*p, ctx);
    if (auto* neg = expr.as<Negate>()) return -to_xpath_number(eval(*neg->operand, ctx), doc);
    if (auto* seq = expr.as<Sequence>()) {
        if (seq->items.empty()) return NodeSet{};
        StringSeq out;
        for (const auto& item : seq->items) {
            Value v = eval(*item, ctx);
            if (detail::is_multi(v)) {
                auto a = detail::atoms(v, doc);
                out.items.insert(out.items.end(), a.begin(), a.end());
            } else {
                out.items.push_back(to_xpath_string(v, doc));
            }
        }
        return out;
    }
    if (auto* call = expr.as<FunctionCall>()) {
        std::vector<Value> args;
        args.reserve(call->args.size());
        for (const auto& a : call->args) args.push_back(eval(*a, ctx));
        return call_function(call->name, args, ctx);
    }
    const Binary& b = *expr.as<Binary>();
    switch (b.op) {
    case BinaryOp::Or:
        return to_xpath_boolean(eval(*b.lhs, ctx)) || to_xpath_boolean(eval(*b.rhs, ctx));
    case BinaryOp::And:
        return to_xpath_boolean(eval(*b.lhs, ctx)) && to_xpath_boolean(eval(*b.rhs, ctx));
    default:
        break;
    }
    Value l = eval(*b.lhs, ctx);
    Value r = eval(*b.rhs, ctx);
    switch (b.op) {
    case BinaryOp::Eq:
    case BinaryOp::Ne:
    case BinaryOp::Lt:
    case BinaryOp::Le:
    case BinaryOp::Gt:
    case BinaryOp::Ge:
        return detail::compare(b.op, l, r, doc);
    case BinaryOp::WordContains:
        return word_contains(to_xpath_string(l, doc), to_xpath_string(r, doc));
    case BinaryOp::Substring:
        return substring_contains(to_xpath_string(l, doc), to_xpath_string(r, doc));
    case BinaryOp::Add: return to_xpath_number(l, doc) + to_xpath_number(r, doc);
    case BinaryOp::Sub: return to_xpath_number(l, doc) - to_xpath_number(r, doc);
    case BinaryOp::Mul: return to_xpath_number(l, doc) * to_xpath_number(r, doc);
    case BinaryOp::Div: return to_xpath_number(l, doc) / to_xpath_number(r, doc);
    case BinaryOp::Mod: return std::fmod(to_xpath_number(l, doc), to_xpath_number(r, doc));
    case BinaryOp::Union: {
        auto* ln = std::get_if<NodeSet>(&l);
        auto* rn = std::get_if<NodeSet>(&r);
        if (!ln || !rn) throw EvalError(EvalErrorKind::Type, "'|' requires node-set operands");
        return detail::merge(doc, std::move(*ln), *rn);
    }
    default:
        break;
    }
    throw EvalError(EvalErrorKind::Unsupported, "unsupported operator");
}

/// Convenience: evaluate against the document node.
inline Value eval(const Expr& expr, const Document& doc) {
    return eval(expr, EvalContext{&doc, doc.root(), 1, 1});
}

} // namespace xpath
} // namespace oxpath
