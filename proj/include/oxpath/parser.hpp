#pragma once

// Recursive-descent parser for wrappers and the static restriction checker.

#include "oxpath/ast.hpp"
#include "oxpath/error.hpp"

#include <cctype>
#include <charconv>
#include <string>
#include <string_view>
#include <vector>

namespace oxpath {

namespace detail {

class WrapperParser {
public:
    explicit WrapperParser(std::string_view src) : src_(src) {}

    Wrapper parse_wrapper() {
        Wrapper w;
        skip_ws();
        std::size_t at = pos_;
        if (!eat_keyword("doc")) fail("expected doc(\"URL\") at the start of the wrapper");
        expect("(");
        skip_ws();
        if (!at_quote()) fail("expected a URL string literal in doc()");
        w.doc.url = parse_literal();
        if (w.doc.url.empty()) fail_at("doc() URL must not be empty", at);
        if (eat(",")) w.doc.wait_seconds = parse_wait_option();
        expect(")");
        w.path.start = PathStart::Root;
        skip_ws();
        if (!eof()) {
            if (!peek_is("/")) fail("expected '/' after doc()");
            parse_relative_steps(w.path, /*leading_slash=*/true);
        }
        skip_ws();
        if (!eof()) fail("unexpected trailing input");
        return w;
    }

    ExprPtr parse_standalone_expr() {
        ExprPtr e = parse_expr();
        skip_ws();
        if (!eof()) fail("unexpected trailing input");
        return e;
    }

private:
    // --- lexical helpers ---------------------------------------------------

    bool eof() const { return pos_ >= src_.size(); }
    char cur() const { return eof() ? '\0' : src_[pos_]; }
    char at(std::size_t i) const { return i < src_.size() ? src_[i] : '\0'; }

    [[noreturn]] void fail(const std::string& msg) const { fail_at(msg, pos_); }

    [[noreturn]] void fail_at(const std::string& msg, std::size_t offset) const {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i < offset && i < src_.size(); ++i) {
            if (src_[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw SyntaxError(msg, offset, line, col);
    }

    void skip_plain_ws() {
        while (!eof() && std::isspace(static_cast<unsigned char>(cur()))) ++pos_;
    }

    // Whitespace plus the `?!` / `!?` group decorators, which carry no meaning.
    void skip_ws() {
        for (;;) {
            skip_plain_ws();
            if ((cur() == '?' && at(pos_ + 1) == '!') || (cur() == '!' && at(pos_ + 1) == '?')) {
                pos_ += 2;
                continue;
            }
            return;
        }
    }

    bool peek_is(std::string_view s) {
        skip_ws();
        return src_.substr(pos_, s.size()) == s;
    }

    bool eat(std::string_view s) {
        if (!peek_is(s)) return false;
        pos_ += s.size();
        return true;
    }

    void expect(std::string_view s) {
        if (!eat(s)) fail("expected '" + std::string(s) + "'");
    }

    static bool name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
    static bool name_char(char c) {
        return name_start(c) || std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '.';
    }

    bool eat_keyword(std::string_view kw) {
        skip_ws();
        if (src_.substr(pos_, kw.size()) != kw || name_char(at(pos_ + kw.size()))) return false;
        pos_ += kw.size();
        return true;
    }

    std::string parse_ncname() {
        skip_ws();
        if (!name_start(cur())) fail("expected a name");
        std::size_t start = pos_;
        while (name_char(cur())) ++pos_;
        // A trailing '.' belongs to the next token (e.g. `a/.`), never to a name.
        while (pos_ > start + 1 && src_[pos_ - 1] == '.') --pos_;
        return std::string(src_.substr(start, pos_ - start));
    }

    // Name of the token at pos_ without consuming it.
    std::string_view peek_ncname() {
        skip_ws();
        if (!name_start(cur())) return {};
        std::size_t end = pos_;
        while (name_char(at(end))) ++end;
        while (end > pos_ + 1 && src_[end - 1] == '.') --end;
        return src_.substr(pos_, end - pos_);
    }

    // Position after `n` characters plus any whitespace.
    std::size_t after_ws(std::size_t from) const {
        while (from < src_.size() && std::isspace(static_cast<unsigned char>(src_[from]))) ++from;
        return from;
    }

    bool at_quote() const { return cur() == '"' || cur() == '\''; }

    std::string parse_literal() {
        skip_ws();
        std::size_t start = pos_;
        char q = cur();
        ++pos_;
        std::string out;
        for (;;) {
            if (eof()) fail_at("unterminated string literal", start);
            char c = src_[pos_];
            if (c == '\\' && at(pos_ + 1) == q) {
                out.push_back(q);
                pos_ += 2;
            } else if (c == q) {
                ++pos_;
                return out;
            } else {
                out.push_back(c);
                ++pos_;
            }
        }
    }

    bool at_number() const {
        return std::isdigit(static_cast<unsigned char>(cur())) ||
               (cur() == '.' && std::isdigit(static_cast<unsigned char>(at(pos_ + 1))));
    }

    double parse_number() {
        skip_ws();
        std::size_t start = pos_;
        while (std::isdigit(static_cast<unsigned char>(cur()))) ++pos_;
        if (cur() == '.') {
            ++pos_;
            while (std::isdigit(static_cast<unsigned char>(cur()))) ++pos_;
        }
        double v = 0;
        auto text = src_.substr(start, pos_ - start);
        auto res = std::from_chars(text.data(), text.data() + text.size(), v);
        if (res.ec != std::errc{}) {
            // from_chars rejects a leading '.'; XPath allows it.
            std::string padded = "0" + std::string(text);
            std::from_chars(padded.data(), padded.data() + padded.size(), v);
        }
        return v;
    }

    unsigned parse_unsigned() {
        skip_ws();
        if (!std::isdigit(static_cast<unsigned char>(cur()))) fail("expected a non-negative integer");
        unsigned v = 0;
        auto res = std::from_chars(src_.data() + pos_, src_.data() + src_.size(), v);
        if (res.ec != std::errc{}) fail("integer out of range");
        pos_ = static_cast<std::size_t>(res.ptr - src_.data());
        return v;
    }

    // `[wait=T]`
    double parse_wait_option() {
        expect("[");
        if (!eat_keyword("wait")) fail("expected 'wait'");
        expect("=");
        skip_ws();
        if (!at_number()) fail("expected a number of seconds");
        double v = parse_number();
        expect("]");
        return v;
    }

    // --- expressions ---------------------------------------------------------

    template <class F>
    auto with_gt_allowed(F&& f) {
        bool saved = stop_at_gt_;
        stop_at_gt_ = false;
        auto r = f();
        stop_at_gt_ = saved;
        return r;
    }

    ExprPtr binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs) {
        SourceSpan span{lhs->span.begin, rhs->span.end};
        return make_expr(Binary{op, std::move(lhs), std::move(rhs)}, span);
    }

    ExprPtr parse_expr() { return parse_or(); }

    ExprPtr parse_or() {
        ExprPtr lhs = parse_and();
        while (eat_keyword("or")) lhs = binary(BinaryOp::Or, std::move(lhs), parse_and());
        return lhs;
    }

    ExprPtr parse_and() {
        ExprPtr lhs = parse_equality();
        while (eat_keyword("and")) lhs = binary(BinaryOp::And, std::move(lhs), parse_equality());
        return lhs;
    }

    ExprPtr parse_equality() {
        ExprPtr lhs = parse_relational();
        for (;;) {
            BinaryOp op;
            if (eat("!=")) op = BinaryOp::Ne;
            else if (eat("~=")) op = BinaryOp::WordContains;
            else if (eat("#=")) op = BinaryOp::Substring;
            else if (eat("=")) op = BinaryOp::Eq;
            else return lhs;
            lhs = binary(op, std::move(lhs), parse_relational());
        }
    }

    ExprPtr parse_relational() {
        ExprPtr lhs = parse_additive();
        for (;;) {
            BinaryOp op;
            if (eat("<=")) op = BinaryOp::Le;
            else if (peek_is("<") && at(pos_ + 1) != '<') {
                ++pos_;
                op = BinaryOp::Lt;
            } else if (!stop_at_gt_ && eat(">=")) op = BinaryOp::Ge;
            else if (!stop_at_gt_ && eat(">")) op = BinaryOp::Gt;
            else return lhs;
            lhs = binary(op, std::move(lhs), parse_additive());
        }
    }

    ExprPtr parse_additive() {
        ExprPtr lhs = parse_multiplicative();
        for (;;) {
            BinaryOp op;
            if (eat("+")) op = BinaryOp::Add;
            else if (eat("-")) op = BinaryOp::Sub;
            else return lhs;
            lhs = binary(op, std::move(lhs), parse_multiplicative());
        }
    }

    ExprPtr parse_multiplicative() {
        ExprPtr lhs = parse_unary();
        for (;;) {
            BinaryOp op;
            if (eat("*")) op = BinaryOp::Mul;
            else if (eat_keyword("div")) op = BinaryOp::Div;
            else if (eat_keyword("mod")) op = BinaryOp::Mod;
            else return lhs;
            lhs = binary(op, std::move(lhs), parse_unary());
        }
    }

    ExprPtr parse_unary() {
        skip_ws();
        std::size_t start = pos_;
        if (eat("-")) {
            ExprPtr operand = parse_unary();
            SourceSpan span{start, operand->span.end};
            return make_expr(Negate{std::move(operand)}, span);
        }
        return parse_union();
    }

    ExprPtr parse_union() {
        ExprPtr lhs = parse_path_expr();
        while (eat("|")) lhs = binary(BinaryOp::Union, std::move(lhs), parse_path_expr());
        return lhs;
    }

    static bool is_node_type(std::string_view n) {
        return n == "text" || n == "node" || n == "comment" || n == "processing-instruction" || n == "field";
    }

    ExprPtr parse_path_expr() {
        skip_ws();
        std::size_t start = pos_;
        PathExpr p;
        if (cur() == '/') {
            p.start = PathStart::Root;
            if (src_.substr(pos_, 2) == "//") {
                parse_relative_steps(p, true);
            } else {
                ++pos_;
                skip_ws();
                if (can_start_step()) parse_relative_steps(p, false);
            }
            return make_expr(std::move(p), {start, pos_});
        }
        bool filter = at_quote() || at_number() || cur() == '(';
        if (!filter) {
            auto name = peek_ncname();
            if (!name.empty()) {
                std::size_t next = after_ws(pos_ + name.size());
                bool call = at(next) == '(' && !is_node_type(name);
                bool axis = at(next) == ':' && at(next + 1) == ':';
                filter = call && !axis;
            }
        }
        if (!filter) {
            if (!can_start_step()) fail("expected an expression");
            p.start = PathStart::Context;
            parse_step_into(p);
            parse_relative_steps(p, false, /*continuing=*/true);
            return make_expr(std::move(p), {start, pos_});
        }
        ExprPtr primary = parse_primary();
        skip_ws();
        if (cur() != '[' && cur() != '/') return primary;
        p.start = PathStart::Filter;
        p.filter = std::move(primary);
        while (peek_is("[")) p.filter_predicates.push_back(parse_predicate());
        skip_ws();
        if (cur() == '/') parse_relative_steps(p, true);
        return make_expr(std::move(p), {start, pos_});
    }

    ExprPtr parse_primary() {
        skip_ws();
        std::size_t start = pos_;
        if (at_quote()) {
            std::string v = parse_literal();
            return make_expr(Literal{std::move(v)}, {start, pos_});
        }
        if (at_number()) {
            double v = parse_number();
            return make_expr(Number{v}, {start, pos_});
        }
        if (cur() == '(') {
            ++pos_;
            return with_gt_allowed([&] {
                Sequence seq;
                if (!eat(")")) {
                    do {
                        seq.items.push_back(parse_expr());
                    } while (eat(","));
                    expect(")");
                }
                if (seq.items.size() == 1) {
                    ExprPtr only = std::move(seq.items.front());
                    return only;
                }
                return make_expr(std::move(seq), {start, pos_});
            });
        }
        std::string name = parse_ncname();
        expect("(");
        return with_gt_allowed([&] {
            FunctionCall call{name, {}};
            if (!eat(")")) {
                do {
                    call.args.push_back(parse_expr());
                } while (eat(","));
                expect(")");
            }
            return make_expr(std::move(call), {start, pos_});
        });
    }

    // --- paths and steps ------------------------------------------------------

    bool can_start_step() {
        skip_ws();
        char c = cur();
        return name_start(c) || c == '*' || c == '@' || c == '.' || c == '{' || c == '(';
    }

    static Step descendant_or_self_step(std::size_t at) {
        Step s;
        s.axis = Axis::DescendantOrSelf;
        s.test.kind = NodeTestKind::Node;
        s.span = {at, at + 2};
        return s;
    }

    // Parses `('/' | '//') Step` repetitions. With `continuing`, the first step
    // was already consumed by the caller.
    void parse_relative_steps(PathExpr& p, bool leading_slash, bool continuing = false) {
        if (!leading_slash && !continuing) parse_step_into(p);
        for (;;) {
            skip_ws();
            if (src_.substr(pos_, 2) == "//") {
                p.steps.push_back(descendant_or_self_step(pos_));
                pos_ += 2;
                parse_step_into(p);
            } else if (cur() == '/') {
                ++pos_;
                parse_step_into(p);
            } else {
                return;
            }
        }
    }

    void parse_step_into(PathExpr& p) {
        skip_ws();
        std::size_t start = pos_;
        if (cur() == '{') {
            p.steps.push_back(parse_action_step());
            return;
        }
        if (cur() == '(') {
            p.steps.push_back(parse_kleene_step());
            return;
        }
        Step s;
        if (src_.substr(pos_, 2) == "..") {
            pos_ += 2;
            s.axis = Axis::Parent;
            s.test.kind = NodeTestKind::Node;
        } else if (cur() == '.') {
            ++pos_;
            s.axis = Axis::Self;
            s.test.kind = NodeTestKind::Node;
        } else {
            if (cur() == '@') {
                ++pos_;
                s.axis = Axis::Attribute;
            } else if (name_start(cur())) {
                auto name = peek_ncname();
                std::size_t next = after_ws(pos_ + name.size());
                if (at(next) == ':' && at(next + 1) == ':') {
                    s.axis = axis_from_name(name, pos_);
                    pos_ = next + 2;
                }
            }
            s.test = parse_node_test();
        }
        for (;;) {
            skip_ws();
            if (cur() == '[') {
                s.modifiers.emplace_back(parse_predicate());
            } else if (cur() == ':' && at(pos_ + 1) == '<') {
                s.modifiers.emplace_back(parse_marker());
            } else {
                break;
            }
        }
        s.span = {start, pos_};
        p.steps.push_back(std::move(s));
    }

    Axis axis_from_name(std::string_view n, std::size_t where) {
        static constexpr Axis kAll[] = {Axis::Child,           Axis::Descendant,       Axis::Parent,
                                        Axis::Ancestor,        Axis::Following,        Axis::FollowingSibling,
                                        Axis::Preceding,       Axis::PrecedingSibling, Axis::Self,
                                        Axis::DescendantOrSelf, Axis::AncestorOrSelf,  Axis::Attribute};
        for (Axis a : kAll)
            if (n == axis_name(a)) return a;
        fail_at("unknown axis '" + std::string(n) + "'", where);
    }

    NodeTest parse_node_test() {
        skip_ws();
        NodeTest t;
        if (cur() == '*') {
            ++pos_;
            t.kind = NodeTestKind::Wildcard;
            return t;
        }
        std::size_t start = pos_;
        std::string name = parse_ncname();
        std::size_t next = after_ws(pos_);
        if (at(next) != '(') {
            t.kind = NodeTestKind::Name;
            t.name = std::move(name);
            return t;
        }
        if (!is_node_type(name)) fail_at("function call '" + name + "' is not allowed as a location step", start);
        pos_ = next + 1;
        if (name == "text") t.kind = NodeTestKind::Text;
        else if (name == "node") t.kind = NodeTestKind::Node;
        else if (name == "comment") t.kind = NodeTestKind::Comment;
        else if (name == "field") t.kind = NodeTestKind::Field;
        else {
            t.kind = NodeTestKind::ProcessingInstruction;
            skip_ws();
            if (at_quote()) t.name = parse_literal();
        }
        expect(")");
        return t;
    }

    Predicate parse_predicate() {
        skip_ws();
        Predicate pr;
        std::size_t start = pos_;
        ++pos_;  // '['
        skip_plain_ws();
        if (cur() == '?' && at(pos_ + 1) != '!') {
            ++pos_;
            pr.optional = true;
        }
        pr.expr = with_gt_allowed([&] { return parse_expr(); });
        expect("]");
        pr.span = {start, pos_};
        if (!pr.optional) {
            if (const Number* n = pr.expr->as<Number>()) {
                pr.numeric_shorthand = n->value;
                SourceSpan s = pr.expr->span;
                pr.expr = make_expr(Binary{BinaryOp::Eq, make_expr(FunctionCall{"position", {}}, s),
                                           make_expr(Number{n->value}, s)},
                                    s);
            }
        }
        return pr;
    }

    ExtractionMarker parse_marker() {
        ExtractionMarker m;
        std::size_t start = pos_;
        pos_ += 2;  // ':<'
        skip_plain_ws();
        if (!name_start(cur())) fail("expected a marker name");
        std::size_t name_begin = pos_;
        while (std::isalnum(static_cast<unsigned char>(cur())) || cur() == '_' || cur() == '-') ++pos_;
        m.name = std::string(src_.substr(name_begin, pos_ - name_begin));
        if (eat("=")) {
            bool saved = stop_at_gt_;
            stop_at_gt_ = true;
            m.value = parse_expr();
            stop_at_gt_ = saved;
        }
        expect(">");
        m.span = {start, pos_};
        return m;
    }

    Step parse_action_step() {
        Step s;
        s.kind = StepKind::Action;
        std::size_t start = pos_;
        ++pos_;  // '{'
        skip_ws();
        if (at_quote()) {
            s.action.kind = ActionKind::TypeIn;
            s.action.text = parse_literal();
        } else {
            std::size_t name_at = pos_;
            std::string name = parse_ncname();
            if (name == "click") s.action.kind = ActionKind::Click;
            else if (name == "nextclick") s.action.kind = ActionKind::NextClick;
            else if (name == "clkwithchange") s.action.kind = ActionKind::ClickWithChange;
            else if (name == "pressenter") s.action.kind = ActionKind::PressEnter;
            else if (name == "mouseover") s.action.kind = ActionKind::MouseOver;
            else fail_at("unknown action '" + name + "'", name_at);
        }
        if (peek_is("[")) s.action.wait_seconds = parse_wait_option();
        if (eat("/")) s.action.absolute = true;
        expect("}");
        s.span = {start, pos_};
        return s;
    }

    Step parse_kleene_step() {
        Step s;
        s.kind = StepKind::Kleene;
        s.kleene = std::make_unique<KleeneExpr>();
        std::size_t start = pos_;
        ++pos_;  // '('
        with_gt_allowed([&] {
            PathExpr& body = s.kleene->body;
            skip_ws();
            if (cur() == '/') {
                body.start = PathStart::Root;
                parse_relative_steps(body, true);
            } else {
                body.start = PathStart::Context;
                parse_relative_steps(body, false);
            }
            return 0;
        });
        expect(")");
        skip_ws();
        if (cur() != '*') fail("expected '*' after a parenthesised step group");
        ++pos_;
        skip_ws();
        if (cur() == '{') {
            ++pos_;
            skip_ws();
            if (cur() != ',') s.kleene->lower = parse_unsigned();
            expect(",");
            skip_ws();
            if (cur() != '}') s.kleene->upper = parse_unsigned();
            expect("}");
            if (s.kleene->lower && s.kleene->upper && *s.kleene->lower > *s.kleene->upper)
                fail_at("Kleene star lower bound exceeds upper bound", start);
        }
        s.span = {start, pos_};
        return s;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    bool stop_at_gt_ = false;
};

} // namespace detail

/// Parses a complete wrapper `doc("URL")...`.
inline Wrapper parse(std::string_view source) {
    if (source.find_first_not_of(" \t\r\n") == std::string_view::npos) throw SyntaxError("empty wrapper", 0, 1, 1);
    return detail::WrapperParser(source).parse_wrapper();
}

/// Parses a bare (O)XPath expression, without doc().
inline ExprPtr parse_expression(std::string_view source) {
    return detail::WrapperParser(source).parse_standalone_expr();
}

// ---------------------------------------------------------------------------
// Static restrictions.

enum class Rule { MultipleKleene, MarkerInArgument, ActionInArgument, MarkerValueNotScalar };

inline constexpr const char* rule_name(Rule r) noexcept {
    switch (r) {
    case Rule::MultipleKleene: return "MultipleKleene";
    case Rule::MarkerInArgument: return "MarkerInArgument";
    case Rule::ActionInArgument: return "ActionInArgument";
    case Rule::MarkerValueNotScalar: return "MarkerValueNotScalar";
    }
    return "?";
}

struct Violation {
    Rule rule;
    SourceSpan span;
    std::string message;
};

namespace detail {

class Validator {
public:
    std::vector<Violation> violations;

    void path(const PathExpr& p, bool in_arg) {
        if (p.filter) expr(*p.filter, true);
        for (const auto& pr : p.filter_predicates) expr(*pr.expr, in_arg);
        for (const auto& s : p.steps) step(s, in_arg);
    }

    void expr(const Expr& e, bool in_arg) {
        if (auto* f = e.as<FunctionCall>()) {
            for (const auto& a : f->args) expr(*a, true);
        } else if (auto* b = e.as<Binary>()) {
            expr(*b->lhs, true);
            expr(*b->rhs, true);
        } else if (auto* n = e.as<Negate>()) {
            expr(*n->operand, true);
        } else if (auto* s = e.as<Sequence>()) {
            for (const auto& i : s->items) expr(*i, true);
        } else if (auto* p = e.as<PathExpr>()) {
            path(*p, in_arg);
        }
    }

private:
    void step(const Step& s, bool in_arg) {
        switch (s.kind) {
        case StepKind::Axis:
            for (const auto& m : s.modifiers) {
                if (auto* pr = std::get_if<Predicate>(&m)) {
                    expr(*pr->expr, in_arg);
                    continue;
                }
                const auto& mk = std::get<ExtractionMarker>(m);
                if (in_arg)
                    add(Rule::MarkerInArgument, mk.span, "extraction marker '" + mk.name + "' inside an argument");
                if (mk.value) {
                    const Binary* b = mk.value->as<Binary>();
                    if ((b && b->op == BinaryOp::Union) || mk.value->as<Sequence>())
                        add(Rule::MarkerValueNotScalar, mk.value->span,
                            "value of marker '" + mk.name + "' is a node sequence, not a scalar");
                    expr(*mk.value, true);
                }
            }
            return;
        case StepKind::Action:
            if (in_arg)
                add(Rule::ActionInArgument, s.span,
                    std::string("action '") + action_name(s.action.kind) + "' inside an argument");
            return;
        case StepKind::Kleene:
            if (++kleene_count_ > 1) add(Rule::MultipleKleene, s.span, "only one Kleene star is allowed");
            path(s.kleene->body, in_arg);
            return;
        }
    }

    void add(Rule r, SourceSpan span, std::string msg) { violations.push_back({r, span, std::move(msg)}); }

    int kleene_count_ = 0;
};

} // namespace detail

inline std::vector<Violation> validate(const Wrapper& w) {
    detail::Validator v;
    v.path(w.path, false);
    return std::move(v.violations);
}

} // namespace oxpath
