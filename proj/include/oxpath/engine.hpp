#pragma once

// Wrapper evaluation: depth-first navigation over a BrowserSession with
// markers committed only for branches whose continuation succeeds.

#include "oxpath/ast.hpp"
#include "oxpath/browser.hpp"
#include "oxpath/dom.hpp"
#include "oxpath/error.hpp"
#include "oxpath/output_tree.hpp"
#include "oxpath/parser.hpp"
#include "oxpath/xpath_eval.hpp"

#include <algorithm>
#include <exception>
#include <functional>
#include <unordered_map>

namespace oxpath {

struct EvalReport {
    std::size_t pages_visited = 0;
    std::size_t actions_applied = 0;
    std::size_t records_emitted = 0;
    std::size_t attributes_emitted = 0;
    std::size_t kleene_body_evaluations = 0;
    std::size_t kleene_subsequent_evaluations = 0;
    std::vector<TraceEntry> trace;
};

struct EngineOptions {
    /// Guards against a star whose body never fails.
    std::size_t max_kleene_depth = 10000;
};

namespace detail {

class CountingSink : public OutputSink {
public:
    CountingSink(OutputSink& inner, EvalReport& report) : inner_(inner), report_(report) {}
    void begin_record(const std::string& name) override {
        ++report_.records_emitted;
        inner_.begin_record(name);
    }
    void attribute(const std::string& name, const std::string& value) override {
        ++report_.attributes_emitted;
        inner_.attribute(name, value);
    }
    void end_record() override { inner_.end_record(); }

private:
    OutputSink& inner_;
    EvalReport& report_;
};

inline bool path_has_effects(const PathExpr& p);

inline bool expr_has_effects(const Expr& e) {
    if (auto* p = e.as<PathExpr>()) return path_has_effects(*p);
    if (auto* f = e.as<FunctionCall>())
        return std::any_of(f->args.begin(), f->args.end(), [](const ExprPtr& a) { return expr_has_effects(*a); });
    if (auto* b = e.as<Binary>()) return expr_has_effects(*b->lhs) || expr_has_effects(*b->rhs);
    if (auto* n = e.as<Negate>()) return expr_has_effects(*n->operand);
    if (auto* s = e.as<Sequence>())
        return std::any_of(s->items.begin(), s->items.end(), [](const ExprPtr& a) { return expr_has_effects(*a); });
    return false;
}

inline bool path_has_effects(const PathExpr& p) {
    if (p.filter && expr_has_effects(*p.filter)) return true;
    for (const auto& pr : p.filter_predicates)
        if (expr_has_effects(*pr.expr)) return true;
    for (const Step& s : p.steps) {
        if (s.kind != StepKind::Axis) return true;
        for (const auto& m : s.modifiers) {
            if (std::holds_alternative<ExtractionMarker>(m)) return true;
            if (expr_has_effects(*std::get<Predicate>(m).expr)) return true;
        }
    }
    return false;
}

inline bool path_has_markers(const PathExpr& p);

inline bool expr_has_markers(const Expr& e) {
    if (auto* p = e.as<PathExpr>()) return path_has_markers(*p);
    return false;  // markers only live inside paths reachable as predicates
}

inline bool path_has_markers(const PathExpr& p) {
    for (const Step& s : p.steps) {
        if (s.kind == StepKind::Kleene) {
            if (path_has_markers(s.kleene->body)) return true;
            continue;
        }
        for (const auto& m : s.modifiers) {
            if (std::holds_alternative<ExtractionMarker>(m)) return true;
            if (expr_has_markers(*std::get<Predicate>(m).expr)) return true;
        }
    }
    return false;
}

} // namespace detail

class Engine {
public:
    explicit Engine(BrowserSession& session, EngineOptions options = {}) : session_(session), options_(options) {}

    /// Evaluates a validated wrapper, streaming output events to `sink`.
    EvalReport evaluate(const Wrapper& w, OutputSink& sink) {
        auto violations = validate(w);
        if (!violations.empty()) throw ValidationError(violations.front().message);
        report_ = EvalReport{};
        std::size_t loads_before = session_.pages_loaded();
        std::size_t actions_before = session_.actions_applied();
        std::size_t trace_before = session_.trace().size();
        detail::CountingSink counting(sink, report_);
        try {
            session_.open(w.doc.url, w.doc.wait_seconds.value_or(session_.site().default_wait));
        } catch (const Error& e) {
            std::throw_with_nested(EvaluationFailure(0, w.doc.url, e.what()));
        }
        run_path(w.path, session_.current().document->root(), counting, [](NodeId, OutputSink&) { return true; });
        report_.pages_visited = session_.pages_loaded() - loads_before;
        report_.actions_applied = session_.actions_applied() - actions_before;
        report_.trace.assign(session_.trace().begin() + static_cast<std::ptrdiff_t>(trace_before),
                             session_.trace().end());
        return report_;
    }

    /// Convenience wrapper that materializes the output tree.
    std::pair<OutputNode, EvalReport> evaluate_tree(const Wrapper& w) {
        TreeBuilder builder;
        EvalReport r = evaluate(w, builder);
        return {builder.finish(), std::move(r)};
    }

private:
    using Cont = std::function<bool(NodeId, OutputSink&)>;

    struct Candidate {
        NodeId node;
        Fragment fragment;
        std::size_t open_records = 0;
    };

    BrowserSession& session_;
    EngineOptions options_;
    EvalReport report_;
    std::unordered_map<const Expr*, bool> effects_;

    bool has_effects(const Expr& e) {
        auto it = effects_.find(&e);
        if (it != effects_.end()) return it->second;
        bool r = detail::expr_has_effects(e);
        effects_.emplace(&e, r);
        return r;
    }

    std::shared_ptr<const Document> page() const { return session_.current().document; }

    bool run_path(const PathExpr& path, NodeId ctx, OutputSink& out, const Cont& cont) {
        switch (path.start) {
        case PathStart::Context: return run_steps(path.steps, 0, ctx, out, cont);
        case PathStart::Root: return run_steps(path.steps, 0, page()->root(), out, cont);
        case PathStart::Filter: break;
        }
        auto doc = page();
        NodeSet start;
        try {
            if (has_effects(*path.filter))
                throw EvalError(EvalErrorKind::Unsupported, "a filter expression cannot navigate or extract");
            Value v = xpath::eval(*path.filter, EvalContext{doc.get(), ctx, 1, 1});
            auto* ns = std::get_if<NodeSet>(&v);
            if (!ns) throw EvalError(EvalErrorKind::Type, "predicates and steps require a node-set");
            start = std::move(*ns);
            for (const auto& pr : path.filter_predicates) {
                if (has_effects(*pr.expr))
                    throw EvalError(EvalErrorKind::Unsupported, "a filter predicate cannot navigate or extract");
                start = xpath::apply_predicate(*doc, start, pr);
            }
        } catch (const EvaluationFailure&) {
            throw;
        } catch (const Error& e) {
            std::throw_with_nested(EvaluationFailure(0, session_.current().url, e.what()));
        }
        bool any = false;
        for (NodeId n : start) any = run_steps(path.steps, 0, n, out, cont) || any;
        return any;
    }

    bool run_steps(const std::vector<Step>& steps, std::size_t i, NodeId node, OutputSink& out, const Cont& cont) {
        if (i == steps.size()) return cont(node, out);
        try {
            switch (steps[i].kind) {
            case StepKind::Axis: return run_axis_step(steps, i, node, out, cont);
            case StepKind::Action: return run_action_step(steps, i, node, out, cont);
            case StepKind::Kleene: return run_kleene_step(steps, i, node, out, cont);
            }
        } catch (const EvaluationFailure&) {
            throw;
        } catch (const Error& e) {
            std::throw_with_nested(EvaluationFailure(i + 1, session_.current().url, e.what()));
        }
        return false;
    }

    void emit_marker(const ExtractionMarker& m, Candidate& c, std::size_t position, std::size_t size,
                     const Document& doc) {
        if (!m.value) {
            c.fragment.begin_record(m.name);
            ++c.open_records;
            return;
        }
        Value v = xpath::eval(*m.value, EvalContext{&doc, c.node, position, size});
        if (auto* ns = std::get_if<NodeSet>(&v); ns && ns->size() > 1)
            throw EvalError(EvalErrorKind::NonScalarMarker,
                            "marker <" + m.name + "> selected " + std::to_string(ns->size()) + " nodes");
        if (auto* seq = std::get_if<StringSeq>(&v); seq && seq->items.size() > 1)
            throw EvalError(EvalErrorKind::NonScalarMarker,
                            "marker <" + m.name + "> produced " + std::to_string(seq->items.size()) + " strings");
        c.fragment.attribute(m.name, to_xpath_string(v, doc));
    }

    bool run_extraction_predicate(const Predicate& p, Candidate& c) {
        auto* path = p.expr->as<PathExpr>();
        if (!path)
            throw EvalError(EvalErrorKind::Unsupported,
                            "a predicate with markers or actions must be a single path expression");
        bool ok = run_path(*path, c.node, c.fragment, [](NodeId, OutputSink&) { return true; });
        return ok || p.optional;
    }

    bool run_axis_step(const std::vector<Step>& steps, std::size_t i, NodeId node, OutputSink& out,
                       const Cont& cont) {
        const Step& s = steps[i];
        auto docp = page();
        const Document& doc = *docp;

        // Pure predicates up to the last one are applied set-wise so that
        // position() and last() see the whole candidate list.
        std::size_t split = 0;
        bool guarded = false;
        for (std::size_t j = 0; j < s.modifiers.size(); ++j) {
            if (auto* p = std::get_if<Predicate>(&s.modifiers[j])) {
                if (has_effects(*p->expr)) guarded = true;
                else split = j + 1;
            } else {
                guarded = true;
            }
        }

        std::vector<Candidate> cands;
        for (NodeId n : xpath::axis_nodes(doc, s.axis, node))
            if (xpath::matches_test(doc, s.axis, s.test, n)) cands.push_back({n, {}, 0});

        for (std::size_t j = 0; j < split; ++j) {
            const auto& mod = s.modifiers[j];
            std::vector<Candidate> kept;
            std::size_t size = cands.size();
            for (std::size_t k = 0; k < size; ++k) {
                Candidate& c = cands[k];
                if (auto* m = std::get_if<ExtractionMarker>(&mod)) {
                    emit_marker(*m, c, k + 1, size, doc);
                    kept.push_back(std::move(c));
                    continue;
                }
                const Predicate& p = std::get<Predicate>(mod);
                bool keep;
                if (has_effects(*p.expr)) {
                    keep = run_extraction_predicate(p, c);
                } else {
                    Value v = xpath::eval(*p.expr, EvalContext{&doc, c.node, k + 1, size});
                    keep = p.optional || (std::holds_alternative<double>(v)
                                              ? std::get<double>(v) == static_cast<double>(k + 1)
                                              : to_xpath_boolean(v));
                }
                if (keep) kept.push_back(std::move(c));
            }
            cands = std::move(kept);
        }

        std::stable_sort(cands.begin(), cands.end(),
                         [&](const Candidate& a, const Candidate& b) { return doc.less(a.node, b.node); });

        bool any = false;
        std::size_t size = cands.size();
        for (std::size_t k = 0; k < size; ++k) {
            Candidate& c = cands[k];
            bool ok = true;
            for (std::size_t j = split; j < s.modifiers.size() && ok; ++j) {
                if (auto* m = std::get_if<ExtractionMarker>(&s.modifiers[j])) emit_marker(*m, c, k + 1, size, doc);
                else ok = run_extraction_predicate(std::get<Predicate>(s.modifiers[j]), c);
            }
            if (!ok) continue;
            OutputSink& sink = guarded ? static_cast<OutputSink&>(c.fragment) : out;
            if (!run_steps(steps, i + 1, c.node, sink, cont)) continue;
            any = true;
            if (!guarded) continue;
            for (std::size_t r = 0; r < c.open_records; ++r) c.fragment.end_record();
            c.fragment.replay(out);
        }
        return any;
    }

    bool run_action_step(const std::vector<Step>& steps, std::size_t i, NodeId node, OutputSink& out,
                         const Cont& cont) {
        const Action& action = steps[i].action;
        auto before = page();
        std::size_t depth = session_.depth();
        NodePath path = path_of(*before, node);
        ActionOutcome outcome = session_.do_action(node, action);
        if (outcome.kind == OutcomeKind::Rejected) return false;
        auto after = page();
        NodeId next;
        if (action.absolute) {
            next = after->root();
        } else if (after == before) {
            next = node;
        } else {
            auto found = resolve_path(*after, path);
            if (!found) throw ContextLost("context node vanished after " + std::string(action_name(action.kind)));
            next = *found;
        }
        bool ok = run_steps(steps, i + 1, next, out, cont);
        session_.restore(depth);
        return ok;
    }

    bool run_kleene_step(const std::vector<Step>& steps, std::size_t i, NodeId node, OutputSink& out,
                         const Cont& cont) {
        const KleeneExpr& k = *steps[i].kleene;
        unsigned lower = k.lower.value_or(0);
        std::optional<unsigned> upper = k.upper;
        bool body_marks = detail::path_has_markers(k.body);

        std::function<bool(unsigned, NodeId, OutputSink&)> iterate = [&](unsigned level, NodeId ctx,
                                                                          OutputSink& sink) {
            if (level > options_.max_kleene_depth)
                throw EvalError(EvalErrorKind::IterationLimit,
                                "Kleene star exceeded " + std::to_string(options_.max_kleene_depth) + " iterations");
            bool any = false;
            if (level >= lower) {
                ++report_.kleene_subsequent_evaluations;
                any = run_steps(steps, i + 1, ctx, sink, cont);
            }
            if (!upper || level < *upper) {
                ++report_.kleene_body_evaluations;
                Fragment tail;
                OutputSink& tail_sink = body_marks ? static_cast<OutputSink&>(tail) : sink;
                run_path(k.body, page()->root(), sink, [&](NodeId r, OutputSink&) {
                    if (iterate(level + 1, r, tail_sink)) any = true;
                    return true;
                });
                if (body_marks) tail.replay(sink);
            }
            return any;
        };
        return iterate(0, node, out);
    }
};

} // namespace oxpath
