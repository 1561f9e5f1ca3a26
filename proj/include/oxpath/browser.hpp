#pragma once

// Simulated browser: fixture pages addressed by URL, manifest-driven DOM
// mutations, history and visited URLs.

#include "oxpath/ast.hpp"
#include "oxpath/dom.hpp"
#include "oxpath/error.hpp"
#include "oxpath/parser.hpp"
#include "oxpath/url.hpp"
#include "oxpath/visibility.hpp"
#include "oxpath/xpath_eval.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace oxpath {

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw NavigationError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

enum class EffectKind { None, Navigate, ReplaceSubtree, AppendChildren };

struct MutationEffect {
    EffectKind kind = EffectKind::None;
    std::string url;       // Navigate
    std::string locator;   // ReplaceSubtree / AppendChildren
    std::string snippet;   // markup, already loaded from the snippet file
};

/// Trigger action names: click, typein, pressenter, mouseover, or "load"
/// for rules applied when the page is opened.
struct MutationRule {
    std::string page;
    std::string action;
    std::string locator;  // "#id" or an XPath expression; empty for load
    MutationEffect effect;
};

struct SiteManifest {
    std::map<std::string, std::filesystem::path> pages;
    /// Pages given as markup rather than files; checked before `pages`.
    std::map<std::string, std::string> inline_pages;
    std::vector<MutationRule> mutations;
    double default_wait = 0;

    /// Reads `site.json`. Page and snippet paths are relative to its directory.
    static SiteManifest load(const std::filesystem::path& manifest_path) {
        std::string text;
        try {
            text = read_file(manifest_path);
        } catch (const NavigationError& e) {
            throw ConfigError(e.what());
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("manifest " + manifest_path.string() + ": " + e.what());
        }
        return from_json(j, manifest_path.parent_path());
    }

    static SiteManifest from_json(const nlohmann::json& j, const std::filesystem::path& dir) {
        SiteManifest m;
        auto fail = [](const std::string& msg) { throw ConfigError("manifest: " + msg); };
        if (!j.is_object() || !j.contains("pages") || !j["pages"].is_object()) fail("missing \"pages\" object");
        for (auto& [u, rel] : j["pages"].items()) {
            if (!rel.is_string()) fail("page path for " + u + " must be a string");
            if (!url::is_absolute(u)) fail("page URL " + u + " is not absolute");
            m.pages[u] = dir / rel.get<std::string>();
        }
        if (j.contains("default_wait")) m.default_wait = j["default_wait"].get<double>();
        for (const auto& r : j.value("mutations", nlohmann::json::array())) {
            MutationRule rule;
            rule.page = r.value("page", "");
            if (!m.has_page(rule.page)) fail("mutation rule targets unknown page \"" + rule.page + "\"");
            const auto& on = r.at("on");
            rule.action = on.value("action", "");
            static const std::set<std::string> kActions{"click", "typein", "pressenter", "mouseover", "load"};
            if (!kActions.count(rule.action)) fail("unknown trigger action \"" + rule.action + "\"");
            rule.locator = on.value("locator", "");
            if (rule.action != "load" && rule.locator.empty()) fail("trigger on " + rule.page + " needs a locator");
            const auto& eff = r.value("effect", nlohmann::json::object());
            std::string type = eff.value("type", "none");
            if (type == "none") {
                rule.effect.kind = EffectKind::None;
            } else if (type == "navigate") {
                rule.effect.kind = EffectKind::Navigate;
                rule.effect.url = eff.at("url").get<std::string>();
                if (rule.action == "load") fail("load rules cannot navigate");
            } else if (type == "replace_subtree" || type == "append_children") {
                rule.effect.kind = type == "replace_subtree" ? EffectKind::ReplaceSubtree : EffectKind::AppendChildren;
                rule.effect.locator = eff.at("locator").get<std::string>();
                try {
                    rule.effect.snippet = read_file(dir / eff.at("snippet").get<std::string>());
                } catch (const NavigationError& e) {
                    fail(e.what());
                }
            } else {
                fail("unknown effect type \"" + type + "\"");
            }
            m.mutations.push_back(std::move(rule));
        }
        return m;
    }

    void add_page(const std::string& u, std::string html) { inline_pages[u] = std::move(html); }

    bool has_page(const std::string& u) const { return inline_pages.count(u) || pages.count(u); }

    /// Markup for `u`: an inline page, a manifest page, else a file:// URL.
    std::optional<std::string> source(const std::string& u) const {
        std::string key = url::strip_fragment(u);
        if (auto it = inline_pages.find(key); it != inline_pages.end()) return it->second;
        if (auto it = pages.find(key); it != pages.end()) return read_file(it->second);
        if (key.rfind("file://", 0) == 0) {
            std::filesystem::path p(key.substr(7));
            if (std::filesystem::is_regular_file(p)) return read_file(p);
        }
        return std::nullopt;
    }
};

/// Elements selected by a manifest locator on `doc`.
inline std::vector<NodeId> resolve_locator(const Document& doc, const std::string& locator) {
    std::vector<NodeId> out;
    if (!locator.empty() && locator[0] == '#') {
        std::string_view id = std::string_view(locator).substr(1);
        for (NodeId n : doc.in_document_order())
            if (doc.is_element(n) && doc.attribute(n, "id") == id) out.push_back(n);
        return out;
    }
    auto expr = parse_expression(locator);
    Value v = xpath::eval(*expr, doc);
    if (auto* ns = std::get_if<NodeSet>(&v)) return *ns;
    throw ConfigError("locator \"" + locator + "\" does not select nodes");
}

/// A rendered page. Form values are keyed by the field's NodePath.
struct PageState {
    std::string url;
    std::shared_ptr<const Document> document;
    std::map<std::string, std::string> form_values;
};

inline std::string node_path_key(const NodePath& path) {
    std::string key;
    for (const auto& e : path) {
        key += '/';
        key += e.kind == NodeKind::Text ? "#text" : e.kind == NodeKind::Attribute ? "@" + e.name : e.name;
        key += '[' + std::to_string(e.index) + ']';
    }
    return key;
}

enum class OutcomeKind { Navigated, Mutated, Unchanged, Rejected };

inline const char* outcome_name(OutcomeKind k) {
    switch (k) {
    case OutcomeKind::Navigated: return "navigated";
    case OutcomeKind::Mutated: return "mutated";
    case OutcomeKind::Unchanged: return "unchanged";
    case OutcomeKind::Rejected: return "rejected";
    }
    return "?";
}

struct ActionOutcome {
    OutcomeKind kind = OutcomeKind::Unchanged;
    std::string url;  // current URL after the action
};

enum class TraceKind { Open, Action, Back, Wait };

struct TraceEntry {
    TraceKind kind;
    std::string url;     // page URL after the event
    std::string detail;  // action name and outcome, or wait seconds
    /// snapshot_hash of the page acted on (Action) or arrived at (Open, Back).
    std::uint64_t snapshot = 0;
    bool operator==(const TraceEntry&) const = default;
};

class BrowserSession {
public:
    explicit BrowserSession(SiteManifest site) : site_(std::move(site)) {}

    const SiteManifest& site() const noexcept { return site_; }
    const PageState& current() const {
        if (history_.empty()) throw NavigationError("no page has been opened");
        return history_.back();
    }
    std::size_t depth() const noexcept { return history_.size(); }
    const std::set<std::string>& visited_urls() const noexcept { return visited_; }
    const std::vector<TraceEntry>& trace() const noexcept { return trace_; }
    std::size_t actions_applied() const noexcept { return actions_; }
    std::size_t pages_loaded() const noexcept { return loads_; }

    const PageState& open(const std::string& u, double wait_seconds = 0) {
        PageState page = load(u);
        visited_.insert(page.url);
        history_.push_back(std::move(page));
        trace_.push_back({TraceKind::Open, history_.back().url, "", snapshot_hash(*history_.back().document)});
        note_wait(wait_seconds);
        return history_.back();
    }

    const PageState& back() {
        if (history_.size() < 2) throw HistoryUnderflow();
        history_.pop_back();
        trace_.push_back({TraceKind::Back, history_.back().url, "", snapshot_hash(*history_.back().document)});
        return history_.back();
    }

    /// Pops history until it is `depth` entries deep.
    void restore(std::size_t depth) {
        while (history_.size() > depth) back();
    }

    bool is_visible(NodeId node) const { return oxpath::is_visible(*current().document, node); }

    ActionOutcome do_action(NodeId node, const Action& action) {
        const PageState& page = current();
        const Document& doc = *page.document;
        if (!doc.contains(node)) throw ActionError("node is not part of the current page");
        ++actions_;
        std::uint64_t before = snapshot_hash(doc);
        ActionOutcome out = dispatch(node, action);
        out.url = current().url;
        trace_.push_back({TraceKind::Action, out.url,
                          std::string(action_name(action.kind)) + ":" + outcome_name(out.kind), before});
        if (out.kind != OutcomeKind::Rejected && action.wait_seconds) note_wait(*action.wait_seconds);
        return out;
    }

private:
    PageState load(const std::string& u) {
        auto html = site_.source(u);
        if (!html) throw NavigationError("unknown URL: " + u);
        std::string key = url::strip_fragment(u);
        std::shared_ptr<const Document> doc = std::make_shared<Document>(parse_document(*html, key));
        ++loads_;
        for (const auto& rule : site_.mutations)
            if (rule.page == key && rule.action == "load") doc = apply(*doc, rule.effect);
        return PageState{key, std::move(doc), {}};
    }

    void note_wait(double seconds) {
        if (seconds > 0) trace_.push_back({TraceKind::Wait, current().url, detail::format_number(seconds), 0});
    }

    static std::string trigger_name(ActionKind k) {
        switch (k) {
        case ActionKind::Click:
        case ActionKind::NextClick:
        case ActionKind::ClickWithChange: return "click";
        case ActionKind::TypeIn: return "typein";
        case ActionKind::PressEnter: return "pressenter";
        case ActionKind::MouseOver: return "mouseover";
        }
        return "";
    }

    // First rule whose locator selects the node or one of its ancestors.
    const MutationRule* find_rule(const Document& doc, const std::string& page, NodeId node, ActionKind kind) const {
        std::string trigger = trigger_name(kind);
        for (const auto& rule : site_.mutations) {
            if (rule.page != page || rule.action != trigger) continue;
            auto targets = resolve_locator(doc, rule.locator);
            for (std::optional<NodeId> n = node; n; n = doc.parent(*n))
                if (std::find(targets.begin(), targets.end(), *n) != targets.end()) return &rule;
        }
        return nullptr;
    }

    static std::shared_ptr<const Document> apply(const Document& doc, const MutationEffect& eff) {
        if (eff.kind != EffectKind::ReplaceSubtree && eff.kind != EffectKind::AppendChildren)
            return std::make_shared<Document>(doc);
        auto targets = resolve_locator(doc, eff.locator);
        if (targets.empty()) throw ActionError("mutation locator \"" + eff.locator + "\" matches nothing");
        auto fragment = parse_fragment(eff.snippet);
        TreeNode tree = doc.to_tree();
        // Later targets first so earlier routes stay valid.
        for (auto it = targets.rbegin(); it != targets.rend(); ++it) {
            auto route = child_route(doc, *it);
            if (eff.kind == EffectKind::AppendChildren) {
                TreeNode* t = follow_route(tree, route);
                t->children.insert(t->children.end(), fragment.begin(), fragment.end());
            } else {
                if (route.empty()) throw ActionError("cannot replace the document node");
                std::size_t idx = route.back();
                route.pop_back();
                TreeNode* parent = follow_route(tree, route);
                parent->children.erase(parent->children.begin() + static_cast<std::ptrdiff_t>(idx));
                parent->children.insert(parent->children.begin() + static_cast<std::ptrdiff_t>(idx), fragment.begin(),
                                        fragment.end());
            }
        }
        return std::make_shared<Document>(Document::from_tree(tree, doc.base_url()));
    }

    static std::optional<std::string> link_target(const Document& doc, NodeId node) {
        for (std::optional<NodeId> n = node; n; n = doc.parent(*n)) {
            if (doc.is_element(*n) && doc.name(*n) == "a")
                if (auto href = doc.attribute(*n, "href")) return url::resolve(doc.base_url(), text::trim(*href));
        }
        return std::nullopt;
    }

    ActionOutcome navigate(const std::string& target, ActionKind kind) {
        std::string key = url::strip_fragment(target);
        if (kind == ActionKind::NextClick && visited_.count(key)) return {OutcomeKind::Rejected, {}};
        PageState next = load(key);
        if (kind == ActionKind::ClickWithChange && serialize(*next.document) == serialize(*current().document))
            return {OutcomeKind::Rejected, {}};
        visited_.insert(next.url);
        history_.push_back(std::move(next));
        return {OutcomeKind::Navigated, {}};
    }

    ActionOutcome mutate(std::shared_ptr<const Document> doc, std::map<std::string, std::string> forms,
                         ActionKind kind) {
        const PageState& page = current();
        if (serialize(*doc) == serialize(*page.document)) {
            if (kind == ActionKind::ClickWithChange) return {OutcomeKind::Rejected, {}};
            if (forms == page.form_values) return {OutcomeKind::Unchanged, {}};
        }
        history_.push_back(PageState{page.url, std::move(doc), std::move(forms)});
        return {OutcomeKind::Mutated, {}};
    }

    ActionOutcome dispatch(NodeId node, const Action& action) {
        const PageState& page = current();
        const Document& doc = *page.document;
        std::shared_ptr<const Document> snapshot = page.document;
        auto forms = page.form_values;

        if (action.kind == ActionKind::TypeIn) {
            if (!doc.is_element(node) || !xpath::is_form_field(doc.name(node)) || doc.name(node) == "button")
                throw ActionError("cannot type into a non-field node");
            forms[node_path_key(path_of(doc, node))] = action.text;
            TreeNode tree = doc.to_tree();
            TreeNode* t = follow_route(tree, child_route(doc, node));
            auto it = std::find_if(t->attributes.begin(), t->attributes.end(),
                                   [](const auto& a) { return a.first == "value"; });
            if (it != t->attributes.end()) it->second = action.text;
            else t->attributes.emplace_back("value", action.text);
            std::shared_ptr<const Document> typed = std::make_shared<Document>(Document::from_tree(tree, doc.base_url()));
            // The typed node keeps its route, so rules can still find it.
            NodeId typed_node = *resolve_path(*typed, path_of(doc, node));
            if (const MutationRule* rule = find_rule(*typed, page.url, typed_node, action.kind)) {
                if (rule->effect.kind == EffectKind::Navigate)
                    return navigate(url::resolve(doc.base_url(), rule->effect.url), action.kind);
                typed = apply(*typed, rule->effect);
            }
            return mutate(std::move(typed), std::move(forms), action.kind);
        }

        if (const MutationRule* rule = find_rule(doc, page.url, node, action.kind)) {
            if (rule->effect.kind == EffectKind::Navigate)
                return navigate(url::resolve(doc.base_url(), rule->effect.url), action.kind);
            return mutate(apply(doc, rule->effect), std::move(forms), action.kind);
        }

        switch (action.kind) {
        case ActionKind::Click:
        case ActionKind::NextClick:
        case ActionKind::ClickWithChange:
            if (auto target = link_target(doc, node)) return navigate(*target, action.kind);
            // A nextclick that goes nowhere stays on a visited URL.
            if (action.kind == ActionKind::NextClick) return {OutcomeKind::Rejected, {}};
            return mutate(snapshot, std::move(forms), action.kind);
        default:
            return {OutcomeKind::Unchanged, {}};
        }
    }

    SiteManifest site_;
    std::vector<PageState> history_;
    std::set<std::string> visited_;
    std::vector<TraceEntry> trace_;
    std::size_t actions_ = 0;
    std::size_t loads_ = 0;
};

} // namespace oxpath
