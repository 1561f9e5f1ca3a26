#pragma once

// Wrapper syntax tree. Abbreviations are already desugared: every location
// step carries an explicit axis and node test.

#include <charconv>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace oxpath {

enum class Axis {
    Child,
    Descendant,
    Parent,
    Ancestor,
    Following,
    FollowingSibling,
    Preceding,
    PrecedingSibling,
    Self,
    DescendantOrSelf,
    AncestorOrSelf,
    Attribute,
};

inline constexpr const char* axis_name(Axis a) noexcept {
    switch (a) {
    case Axis::Child: return "child";
    case Axis::Descendant: return "descendant";
    case Axis::Parent: return "parent";
    case Axis::Ancestor: return "ancestor";
    case Axis::Following: return "following";
    case Axis::FollowingSibling: return "following-sibling";
    case Axis::Preceding: return "preceding";
    case Axis::PrecedingSibling: return "preceding-sibling";
    case Axis::Self: return "self";
    case Axis::DescendantOrSelf: return "descendant-or-self";
    case Axis::AncestorOrSelf: return "ancestor-or-self";
    case Axis::Attribute: return "attribute";
    }
    return "?";
}

inline constexpr bool is_reverse_axis(Axis a) noexcept {
    return a == Axis::Parent || a == Axis::Ancestor || a == Axis::AncestorOrSelf || a == Axis::Preceding ||
           a == Axis::PrecedingSibling;
}

enum class NodeTestKind { Name, Wildcard, Text, Node, Comment, ProcessingInstruction, Field };

struct NodeTest {
    NodeTestKind kind = NodeTestKind::Node;
    std::string name;  // Name only; target literal for processing-instruction("x")

    bool operator==(const NodeTest&) const = default;
};

/// Byte offsets into the wrapper source.
struct SourceSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
};

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Predicate {
    ExprPtr expr;
    /// `[? e]`: evaluated as `e or true()`, so it never filters.
    bool optional = false;
    /// Set when written as `[k]`; expr is then `position() = k`.
    std::optional<double> numeric_shorthand;
    SourceSpan span;
};

struct ExtractionMarker {
    std::string name;
    ExprPtr value;  // null for record markers
    SourceSpan span;
};

using StepModifier = std::variant<Predicate, ExtractionMarker>;

enum class ActionKind { Click, NextClick, ClickWithChange, TypeIn, PressEnter, MouseOver };

inline constexpr const char* action_name(ActionKind k) noexcept {
    switch (k) {
    case ActionKind::Click: return "click";
    case ActionKind::NextClick: return "nextclick";
    case ActionKind::ClickWithChange: return "clkwithchange";
    case ActionKind::TypeIn: return "typein";
    case ActionKind::PressEnter: return "pressenter";
    case ActionKind::MouseOver: return "mouseover";
    }
    return "?";
}

struct Action {
    ActionKind kind = ActionKind::Click;
    std::string text;  // TypeIn only
    bool absolute = false;
    std::optional<double> wait_seconds;

    bool operator==(const Action&) const = default;
};

struct KleeneExpr;

enum class StepKind { Axis, Action, Kleene };

struct Step {
    StepKind kind = StepKind::Axis;
    Axis axis = Axis::Child;
    NodeTest test;
    /// Predicates and markers in source order.
    std::vector<StepModifier> modifiers;
    Action action;
    std::unique_ptr<KleeneExpr> kleene;
    SourceSpan span;
};

enum class PathStart { Context, Root, Filter };

struct PathExpr {
    PathStart start = PathStart::Context;
    ExprPtr filter;  // Filter only
    std::vector<Predicate> filter_predicates;
    std::vector<Step> steps;
};

struct KleeneExpr {
    PathExpr body;
    std::optional<unsigned> lower;
    std::optional<unsigned> upper;
};

struct Literal {
    std::string value;
};
struct Number {
    double value = 0;
};
struct FunctionCall {
    std::string name;
    std::vector<ExprPtr> args;
};

enum class BinaryOp { Or, And, Eq, Ne, Lt, Le, Gt, Ge, Add, Sub, Mul, Div, Mod, Union, WordContains, Substring };

inline constexpr const char* binary_op_text(BinaryOp op) noexcept {
    switch (op) {
    case BinaryOp::Or: return "or";
    case BinaryOp::And: return "and";
    case BinaryOp::Eq: return "=";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "div";
    case BinaryOp::Mod: return "mod";
    case BinaryOp::Union: return "|";
    case BinaryOp::WordContains: return "~=";
    case BinaryOp::Substring: return "#=";
    }
    return "?";
}

struct Binary {
    BinaryOp op = BinaryOp::Or;
    ExprPtr lhs;
    ExprPtr rhs;
};
struct Negate {
    ExprPtr operand;
};
/// Parenthesised comma list such as ("a", "b").
struct Sequence {
    std::vector<ExprPtr> items;
};

struct Expr {
    std::variant<Literal, Number, FunctionCall, Binary, Negate, Sequence, PathExpr> node;
    SourceSpan span;

    template <class T>
    const T* as() const noexcept {
        return std::get_if<T>(&node);
    }
    template <class T>
    T* as() noexcept {
        return std::get_if<T>(&node);
    }
};

template <class T>
ExprPtr make_expr(T node, SourceSpan span = {}) {
    auto e = std::make_unique<Expr>();
    e->node = std::move(node);
    e->span = span;
    return e;
}

struct DocCall {
    std::string url;
    std::optional<double> wait_seconds;
};

struct Wrapper {
    DocCall doc;
    /// Steps after doc(); always rooted at the loaded page.
    PathExpr path;
};

// ---------------------------------------------------------------------------
// Structural equality, ignoring source spans.

inline bool ast_equal(const Expr& a, const Expr& b);
inline bool ast_equal(const PathExpr& a, const PathExpr& b);

namespace detail {

inline bool ptr_equal(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return !a && !b;
    return ast_equal(*a, *b);
}

inline bool predicate_equal(const Predicate& a, const Predicate& b) {
    return a.optional == b.optional && a.numeric_shorthand == b.numeric_shorthand && ptr_equal(a.expr, b.expr);
}

inline bool modifier_equal(const StepModifier& a, const StepModifier& b) {
    if (a.index() != b.index()) return false;
    if (auto* p = std::get_if<Predicate>(&a)) return predicate_equal(*p, std::get<Predicate>(b));
    const auto& ma = std::get<ExtractionMarker>(a);
    const auto& mb = std::get<ExtractionMarker>(b);
    return ma.name == mb.name && ptr_equal(ma.value, mb.value);
}

inline bool step_equal(const Step& a, const Step& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case StepKind::Axis:
        if (a.axis != b.axis || !(a.test == b.test) || a.modifiers.size() != b.modifiers.size()) return false;
        for (std::size_t i = 0; i < a.modifiers.size(); ++i)
            if (!modifier_equal(a.modifiers[i], b.modifiers[i])) return false;
        return true;
    case StepKind::Action:
        return a.action == b.action;
    case StepKind::Kleene:
        return a.kleene->lower == b.kleene->lower && a.kleene->upper == b.kleene->upper &&
               ast_equal(a.kleene->body, b.kleene->body);
    }
    return false;
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

} // namespace detail

inline bool ast_equal(const PathExpr& a, const PathExpr& b) {
    if (a.start != b.start || !detail::ptr_equal(a.filter, b.filter)) return false;
    if (a.filter_predicates.size() != b.filter_predicates.size() || a.steps.size() != b.steps.size()) return false;
    for (std::size_t i = 0; i < a.filter_predicates.size(); ++i)
        if (!detail::predicate_equal(a.filter_predicates[i], b.filter_predicates[i])) return false;
    for (std::size_t i = 0; i < a.steps.size(); ++i)
        if (!detail::step_equal(a.steps[i], b.steps[i])) return false;
    return true;
}

inline bool ast_equal(const Expr& a, const Expr& b) {
    if (a.node.index() != b.node.index()) return false;
    return std::visit(
        detail::overloaded{
            [&](const Literal& x) { return x.value == std::get<Literal>(b.node).value; },
            [&](const Number& x) { return x.value == std::get<Number>(b.node).value; },
            [&](const FunctionCall& x) {
                const auto& y = std::get<FunctionCall>(b.node);
                if (x.name != y.name || x.args.size() != y.args.size()) return false;
                for (std::size_t i = 0; i < x.args.size(); ++i)
                    if (!detail::ptr_equal(x.args[i], y.args[i])) return false;
                return true;
            },
            [&](const Binary& x) {
                const auto& y = std::get<Binary>(b.node);
                return x.op == y.op && detail::ptr_equal(x.lhs, y.lhs) && detail::ptr_equal(x.rhs, y.rhs);
            },
            [&](const Negate& x) { return detail::ptr_equal(x.operand, std::get<Negate>(b.node).operand); },
            [&](const Sequence& x) {
                const auto& y = std::get<Sequence>(b.node);
                if (x.items.size() != y.items.size()) return false;
                for (std::size_t i = 0; i < x.items.size(); ++i)
                    if (!detail::ptr_equal(x.items[i], y.items[i])) return false;
                return true;
            },
            [&](const PathExpr& x) { return ast_equal(x, std::get<PathExpr>(b.node)); },
        },
        a.node);
}

inline bool ast_equal(const Wrapper& a, const Wrapper& b) {
    return a.doc.url == b.doc.url && a.doc.wait_seconds == b.doc.wait_seconds && ast_equal(a.path, b.path);
}

// ---------------------------------------------------------------------------
// Pretty-printer: unabbreviated single-line form that parses back to an equal tree.

namespace detail {

inline std::string format_number(double v) {
    char buf[400];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
    return std::string(buf, res.ptr);
}

inline std::string quote_literal(const std::string& s) {
    char q = (s.find('"') != std::string::npos && s.find('\'') == std::string::npos) ? '\'' : '"';
    std::string out(1, q);
    for (char c : s) {
        if (c == q) out.push_back('\\');
        out.push_back(c);
    }
    out.push_back(q);
    return out;
}

inline void print_expr(std::string& out, const Expr& e);
inline void print_path(std::string& out, const PathExpr& p);

inline void print_predicate(std::string& out, const Predicate& p) {
    out += '[';
    if (p.numeric_shorthand) {
        out += format_number(*p.numeric_shorthand);
    } else {
        if (p.optional) out += "? ";
        print_expr(out, *p.expr);
    }
    out += ']';
}

inline void print_node_test(std::string& out, const NodeTest& t) {
    switch (t.kind) {
    case NodeTestKind::Name: out += t.name; break;
    case NodeTestKind::Wildcard: out += '*'; break;
    case NodeTestKind::Text: out += "text()"; break;
    case NodeTestKind::Node: out += "node()"; break;
    case NodeTestKind::Comment: out += "comment()"; break;
    case NodeTestKind::Field: out += "field()"; break;
    case NodeTestKind::ProcessingInstruction:
        out += "processing-instruction(";
        if (!t.name.empty()) out += quote_literal(t.name);
        out += ')';
        break;
    }
}

inline void print_step(std::string& out, const Step& s) {
    switch (s.kind) {
    case StepKind::Axis:
        out += axis_name(s.axis);
        out += "::";
        print_node_test(out, s.test);
        for (const auto& m : s.modifiers) {
            if (auto* p = std::get_if<Predicate>(&m)) {
                print_predicate(out, *p);
            } else {
                const auto& mk = std::get<ExtractionMarker>(m);
                out += ":<" + mk.name;
                if (mk.value) {
                    out += '=';
                    print_expr(out, *mk.value);
                }
                out += '>';
            }
        }
        return;
    case StepKind::Action:
        out += '{';
        if (s.action.kind == ActionKind::TypeIn) out += quote_literal(s.action.text);
        else out += action_name(s.action.kind);
        if (s.action.wait_seconds) out += " [wait=" + format_number(*s.action.wait_seconds) + "]";
        if (s.action.absolute) out += '/';
        out += '}';
        return;
    case StepKind::Kleene:
        out += '(';
        print_path(out, s.kleene->body);
        out += ")*";
        if (s.kleene->lower || s.kleene->upper) {
            out += '{';
            if (s.kleene->lower) out += std::to_string(*s.kleene->lower);
            out += ',';
            if (s.kleene->upper) out += std::to_string(*s.kleene->upper);
            out += '}';
        }
        return;
    }
}

inline void print_path(std::string& out, const PathExpr& p) {
    if (p.start == PathStart::Filter) {
        out += '(';
        print_expr(out, *p.filter);
        out += ')';
        for (const auto& pr : p.filter_predicates) print_predicate(out, pr);
    }
    if (p.start == PathStart::Root && p.steps.empty()) {
        out += '/';
        return;
    }
    for (std::size_t i = 0; i < p.steps.size(); ++i) {
        if (i > 0 || p.start != PathStart::Context) out += '/';
        print_step(out, p.steps[i]);
    }
}

inline void print_expr(std::string& out, const Expr& e) {
    std::visit(overloaded{
                   [&](const Literal& x) { out += quote_literal(x.value); },
                   [&](const Number& x) { out += format_number(x.value); },
                   [&](const FunctionCall& x) {
                       out += x.name + '(';
                       for (std::size_t i = 0; i < x.args.size(); ++i) {
                           if (i) out += ", ";
                           print_expr(out, *x.args[i]);
                       }
                       out += ')';
                   },
                   [&](const Binary& x) {
                       out += '(';
                       print_expr(out, *x.lhs);
                       out += ' ';
                       out += binary_op_text(x.op);
                       out += ' ';
                       print_expr(out, *x.rhs);
                       out += ')';
                   },
                   [&](const Negate& x) {
                       out += "-(";
                       print_expr(out, *x.operand);
                       out += ')';
                   },
                   [&](const Sequence& x) {
                       out += '(';
                       for (std::size_t i = 0; i < x.items.size(); ++i) {
                           if (i) out += ", ";
                           print_expr(out, *x.items[i]);
                       }
                       out += ')';
                   },
                   [&](const PathExpr& x) { print_path(out, x); },
               },
               e.node);
}

} // namespace detail

inline std::string to_string(const Expr& e) {
    std::string out;
    detail::print_expr(out, e);
    return out;
}

inline std::string to_string(const PathExpr& p) {
    std::string out;
    detail::print_path(out, p);
    return out;
}

inline std::string to_string(const Wrapper& w) {
    std::string out = "doc(" + detail::quote_literal(w.doc.url);
    if (w.doc.wait_seconds) out += ", [wait=" + detail::format_number(*w.doc.wait_seconds) + "]";
    out += ')';
    for (const Step& s : w.path.steps) {
        out += '/';
        detail::print_step(out, s);
    }
    return out;
}

} // namespace oxpath
