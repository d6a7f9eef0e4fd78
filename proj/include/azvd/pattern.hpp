#pragma once

#include <azvd/parser.hpp>

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace azvd {

/// Expression-shaped tree whose leaves may also be `_` (matches anything) or
/// `?name` (binds a subtree; repeated names must bind equal subtrees).
struct Pattern {
    enum class Kind { rule, native, wildcard, variable };

    Kind kind = Kind::wildcard;
    std::string name;  // rule name or variable name
    std::vector<Pattern> children;
    std::optional<NativeValue> native;

    static Pattern wildcard() { return {}; }
    static Pattern variable(std::string name) { return {Kind::variable, std::move(name), {}, {}}; }

    static Pattern from(const Expression& expr) {
        if (expr.is_native()) return {Kind::native, {}, {}, expr.native_value()};
        Pattern p{Kind::rule, expr.name(), {}, {}};
        for (const auto& c : expr.children()) p.children.push_back(from(c));
        return p;
    }

    friend bool operator==(const Pattern&, const Pattern&) = default;
};

using Bindings = std::map<std::string, Expression>;

namespace detail {
inline Pattern read_pattern(Scanner& in) {
    return read_tree<Pattern>(
        in,
        [](std::string name, std::vector<Pattern> kids) {
            return Pattern{Pattern::Kind::rule, std::move(name), std::move(kids), {}};
        },
        [](NativeValue v) { return Pattern{Pattern::Kind::native, {}, {}, std::move(v)}; },
        [](Scanner& s) -> std::optional<Pattern> {
            if (s.peek() == '_' && !is_name_char(s.peek(1))) {
                s.advance();
                return Pattern::wildcard();
            }
            if (s.peek() == '?') {
                s.advance();
                return Pattern::variable(s.read_name("variable name"));
            }
            return std::nullopt;
        });
}
}  // namespace detail

/// Parses the expression grammar extended with `_` and `?name` leaves.
inline Pattern compile_pattern(std::string_view text) {
    detail::Scanner in(text);
    Pattern p = detail::read_pattern(in);
    in.skip_ws();
    if (!in.at_end()) in.fail("end of input");
    return p;
}

inline void print_pattern(const Pattern& p, std::string& out) {
    switch (p.kind) {
        case Pattern::Kind::wildcard: out += '_'; return;
        case Pattern::Kind::variable: out += '?' + p.name; return;
        case Pattern::Kind::native: out += print_native(*p.native); return;
        case Pattern::Kind::rule:
            out += p.name + '(';
            for (std::size_t i = 0; i < p.children.size(); ++i) {
                if (i) out += ", ";
                print_pattern(p.children[i], out);
            }
            out += ')';
            return;
    }
}

inline std::string print_pattern(const Pattern& p) {
    std::string out;
    print_pattern(p, out);
    return out;
}

/// Structural match of `pat` against `expr`. Extends `bindings`; on failure
/// `bindings` may hold partial results and should be discarded.
inline bool match(const Pattern& pat, const Expression& expr, Bindings& bindings) {
    switch (pat.kind) {
        case Pattern::Kind::wildcard: return true;
        case Pattern::Kind::variable: {
            auto [it, inserted] = bindings.try_emplace(pat.name, expr);
            return inserted || it->second == expr;
        }
        case Pattern::Kind::native: return expr.is_native() && expr.native_value() == *pat.native;
        case Pattern::Kind::rule:
            if (!expr.is_rule() || expr.name() != pat.name || expr.arity() != pat.children.size()) return false;
            for (std::size_t i = 0; i < pat.children.size(); ++i)
                if (!match(pat.children[i], expr.children()[i], bindings)) return false;
            return true;
    }
    return false;
}

inline std::optional<Bindings> match(const Pattern& pat, const Expression& expr) {
    Bindings b;
    if (match(pat, expr, b)) return b;
    return std::nullopt;
}

/// Variable names in order of first occurrence (pre-order).
inline std::vector<std::string> pattern_variables(const Pattern& p) {
    std::vector<std::string> out;
    std::function<void(const Pattern&)> walk = [&](const Pattern& q) {
        if (q.kind == Pattern::Kind::variable && std::find(out.begin(), out.end(), q.name) == out.end())
            out.push_back(q.name);
        for (const auto& c : q.children) walk(c);
    };
    walk(p);
    return out;
}

}  // namespace azvd
