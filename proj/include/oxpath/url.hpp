#pragma once

// Reference resolution after RFC 3986, section 5.

#include <cctype>
#include <optional>
#include <string>
#include <string_view>

namespace oxpath::url {

struct Parts {
    std::optional<std::string> scheme;
    std::optional<std::string> authority;
    std::string path;
    std::optional<std::string> query;
    std::optional<std::string> fragment;
};

inline Parts split(std::string_view ref) {
    Parts p;
    if (auto hash = ref.find('#'); hash != std::string_view::npos) {
        p.fragment = std::string(ref.substr(hash + 1));
        ref = ref.substr(0, hash);
    }
    if (auto q = ref.find('?'); q != std::string_view::npos) {
        p.query = std::string(ref.substr(q + 1));
        ref = ref.substr(0, q);
    }
    // scheme = ALPHA *( ALPHA / DIGIT / "+" / "-" / "." ) ":"
    if (auto colon = ref.find(':'); colon != std::string_view::npos && colon > 0) {
        bool ok = std::isalpha(static_cast<unsigned char>(ref[0])) != 0;
        for (std::size_t i = 1; ok && i < colon; ++i) {
            char c = ref[i];
            ok = std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.';
        }
        if (ok) {
            p.scheme = std::string(ref.substr(0, colon));
            ref = ref.substr(colon + 1);
        }
    }
    if (ref.substr(0, 2) == "//") {
        ref = ref.substr(2);
        auto slash = ref.find('/');
        p.authority = std::string(ref.substr(0, slash));
        ref = slash == std::string_view::npos ? std::string_view{} : ref.substr(slash);
    }
    p.path = std::string(ref);
    return p;
}

inline std::string remove_dot_segments(std::string_view in) {
    std::string input(in), output;
    while (!input.empty()) {
        if (input.rfind("../", 0) == 0) {
            input.erase(0, 3);
        } else if (input.rfind("./", 0) == 0) {
            input.erase(0, 2);
        } else if (input.rfind("/./", 0) == 0) {
            input.replace(0, 3, "/");
        } else if (input == "/.") {
            input = "/";
        } else if (input.rfind("/../", 0) == 0 || input == "/..") {
            input = input == "/.." ? "/" : input.substr(3);
            auto last = output.rfind('/');
            output.erase(last == std::string::npos ? 0 : last);
        } else if (input == "." || input == "..") {
            input.clear();
        } else {
            std::size_t start = input[0] == '/' ? 1 : 0;
            auto next = input.find('/', start);
            output += input.substr(0, next);
            input.erase(0, next == std::string::npos ? input.size() : next);
        }
    }
    return output;
}

inline std::string compose(const Parts& p) {
    std::string out;
    if (p.scheme) out += *p.scheme + ":";
    if (p.authority) out += "//" + *p.authority;
    out += p.path;
    if (p.query) out += "?" + *p.query;
    if (p.fragment) out += "#" + *p.fragment;
    return out;
}

inline bool is_absolute(std::string_view u) {
    auto p = split(u);
    return p.scheme.has_value() && p.authority.has_value();
}

/// Resolves `ref` against the absolute URL `base`.
inline std::string resolve(std::string_view base, std::string_view ref) {
    Parts b = split(base);
    Parts r = split(ref);
    Parts t;
    if (r.scheme) {
        t = r;
        t.path = remove_dot_segments(r.path);
    } else {
        if (r.authority) {
            t.authority = r.authority;
            t.path = remove_dot_segments(r.path);
            t.query = r.query;
        } else {
            if (r.path.empty()) {
                t.path = b.path;
                t.query = r.query ? r.query : b.query;
            } else {
                if (r.path[0] == '/') {
                    t.path = remove_dot_segments(r.path);
                } else {
                    std::string merged;
                    if (b.authority && b.path.empty()) {
                        merged = "/" + r.path;
                    } else {
                        auto last = b.path.rfind('/');
                        merged = (last == std::string::npos ? std::string{} : b.path.substr(0, last + 1)) + r.path;
                    }
                    t.path = remove_dot_segments(merged);
                }
                t.query = r.query;
            }
            t.authority = b.authority;
        }
        t.scheme = b.scheme;
    }
    t.fragment = r.fragment;
    return compose(t);
}

/// URL without its fragment.
inline std::string strip_fragment(std::string_view u) {
    auto hash = u.find('#');
    return std::string(u.substr(0, hash));
}

} // namespace oxpath::url
