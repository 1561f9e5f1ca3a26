#pragma once

// Output tree produced by extraction markers, and the event protocol used to
// build or stream it.

#include "oxpath/error.hpp"

#include <optional>
#include <string>
#include <vector>

namespace oxpath {

enum class OutputKind { Root, Record, Attribute };

struct OutputNode {
    OutputKind kind = OutputKind::Root;
    std::string name;
    std::optional<std::string> value;  // attributes only
    std::vector<OutputNode> children;

    static OutputNode root() { return {}; }
    static OutputNode record(std::string name) { return {OutputKind::Record, std::move(name), std::nullopt, {}}; }
    static OutputNode attribute(std::string name, std::string value) {
        return {OutputKind::Attribute, std::move(name), std::move(value), {}};
    }

    /// Appends a child. Attributes are leaves and the root cannot be nested.
    OutputNode& add_child(OutputNode child) {
        if (kind == OutputKind::Attribute)
            throw ProtocolError("attribute node '" + name + "' cannot have children");
        if (child.kind == OutputKind::Root) throw ProtocolError("the root cannot be a child");
        children.push_back(std::move(child));
        return children.back();
    }

    bool operator==(const OutputNode&) const = default;
};

class OutputSink {
public:
    virtual ~OutputSink() = default;
    virtual void begin_record(const std::string& name) = 0;
    virtual void attribute(const std::string& name, const std::string& value) = 0;
    virtual void end_record() = 0;
};

/// Materializes events into a tree rooted at the root node.
class TreeBuilder : public OutputSink {
public:
    TreeBuilder() { stack_.push_back(&root_); }

    void begin_record(const std::string& name) override {
        stack_.push_back(&stack_.back()->add_child(OutputNode::record(name)));
    }
    void attribute(const std::string& name, const std::string& value) override {
        stack_.back()->add_child(OutputNode::attribute(name, value));
    }
    void end_record() override {
        if (stack_.size() < 2) throw ProtocolError("end_record without a matching begin_record");
        stack_.pop_back();
    }

    /// Takes the finished tree; fails when records are still open.
    OutputNode finish() {
        if (stack_.size() != 1) throw ProtocolError(std::to_string(stack_.size() - 1) + " record(s) left open");
        OutputNode out = std::move(root_);
        root_ = OutputNode::root();
        stack_.assign(1, &root_);
        return out;
    }

private:
    OutputNode root_;
    std::vector<OutputNode*> stack_;
};

enum class EventKind { BeginRecord, Attribute, EndRecord };

struct OutputEvent {
    EventKind kind;
    std::string name;
    std::string value;
    bool operator==(const OutputEvent&) const = default;
};

/// Buffers events so they can be committed later or dropped.
class Fragment : public OutputSink {
public:
    void begin_record(const std::string& name) override { events_.push_back({EventKind::BeginRecord, name, {}}); }
    void attribute(const std::string& name, const std::string& value) override {
        events_.push_back({EventKind::Attribute, name, value});
    }
    void end_record() override { events_.push_back({EventKind::EndRecord, {}, {}}); }

    void replay(OutputSink& sink) const {
        for (const auto& e : events_) {
            switch (e.kind) {
            case EventKind::BeginRecord: sink.begin_record(e.name); break;
            case EventKind::Attribute: sink.attribute(e.name, e.value); break;
            case EventKind::EndRecord: sink.end_record(); break;
            }
        }
    }

    const std::vector<OutputEvent>& events() const noexcept { return events_; }
    bool empty() const noexcept { return events_.empty(); }
    void clear() noexcept { events_.clear(); }

private:
    std::vector<OutputEvent> events_;
};

/// Forwards every event to several sinks.
class TeeSink : public OutputSink {
public:
    explicit TeeSink(std::vector<OutputSink*> sinks) : sinks_(std::move(sinks)) {}
    void begin_record(const std::string& name) override {
        for (auto* s : sinks_) s->begin_record(name);
    }
    void attribute(const std::string& name, const std::string& value) override {
        for (auto* s : sinks_) s->attribute(name, value);
    }
    void end_record() override {
        for (auto* s : sinks_) s->end_record();
    }

private:
    std::vector<OutputSink*> sinks_;
};

/// Emits `tree` as events; the root itself produces none.
inline void replay_tree(const OutputNode& tree, OutputSink& sink) {
    for (const auto& c : tree.children) {
        if (c.kind == OutputKind::Attribute) {
            sink.attribute(c.name, c.value.value_or(""));
        } else {
            sink.begin_record(c.name);
            replay_tree(c, sink);
            sink.end_record();
        }
    }
}

inline std::vector<OutputEvent> tree_events(const OutputNode& tree) {
    Fragment f;
    replay_tree(tree, f);
    return f.events();
}

inline OutputNode build_tree(const std::vector<OutputEvent>& events) {
    TreeBuilder b;
    for (const auto& e : events) {
        switch (e.kind) {
        case EventKind::BeginRecord: b.begin_record(e.name); break;
        case EventKind::Attribute: b.attribute(e.name, e.value); break;
        case EventKind::EndRecord: b.end_record(); break;
        }
    }
    return b.finish();
}

namespace detail {
inline void dump_into(std::string& out, const OutputNode& n, std::size_t depth) {
    out.append(depth * 2, ' ');
    out += n.kind == OutputKind::Root ? "⊤" : n.name;
    if (n.value) out += "=" + *n.value;
    out += '\n';
    for (const auto& c : n.children) dump_into(out, c, depth + 1);
}
} // namespace detail

/// Debug dump: one `name[=value]` line per node, two spaces per level.
inline std::string dump(const OutputNode& tree) {
    std::string out;
    detail::dump_into(out, tree, 0);
    return out;
}

} // namespace oxpath
