#pragma once

#include <azvd/decimal.hpp>
#include <azvd/error.hpp>

#include <algorithm>
#include <charconv>
#include <compare>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace azvd {

/// `[a-z][a-z0-9-]*`, the shape of rule and parameter names.
inline bool is_valid_name(std::string_view name) {
    if (name.empty() || name[0] < 'a' || name[0] > 'z') return false;
    for (char c : name)
        if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-')) return false;
    return true;
}

/// Point names additionally allow upper case (`Lssp`, `Rssp`).
inline bool is_valid_point_name(std::string_view name) {
    if (name.empty()) return false;
    auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); };
    if (!alpha(name[0])) return false;
    for (char c : name)
        if (!(alpha(c) || (c >= '0' && c <= '9') || c == '-')) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Native values

enum class Side { left, right };

inline std::string_view to_string(Side s) { return s == Side::left ? "left" : "right"; }

struct Number {
    Decimal value;
    friend bool operator==(const Number&, const Number&) = default;
};

struct Point {
    std::string name;
    friend bool operator==(const Point&, const Point&) = default;
};

using NativeValue = std::variant<Number, Point, Side>;

// ---------------------------------------------------------------------------
// Paths

class InvalidPath : public Error {
public:
    using Error::Error;
};

/// Child indices from the root; empty is the root itself.
struct Path {
    std::vector<std::size_t> indices;

    Path() = default;
    Path(std::initializer_list<std::size_t> init) : indices(init) {}
    explicit Path(std::vector<std::size_t> v) : indices(std::move(v)) {}

    bool empty() const { return indices.empty(); }
    std::size_t size() const { return indices.size(); }

    Path child(std::size_t i) const {
        Path p = *this;
        p.indices.push_back(i);
        return p;
    }

    /// True when this path is a proper prefix of `other`.
    bool is_ancestor_of(const Path& other) const {
        return indices.size() < other.indices.size() &&
               std::equal(indices.begin(), indices.end(), other.indices.begin());
    }

    /// Dot-joined indices; the root is the empty string.
    std::string to_string() const {
        std::string out;
        for (std::size_t k = 0; k < indices.size(); ++k) {
            if (k) out += '.';
            out += std::to_string(indices[k]);
        }
        return out;
    }

    static Path parse(std::string_view text) {
        Path p;
        if (text.empty()) return p;
        std::size_t pos = 0;
        while (true) {
            std::size_t dot = text.find('.', pos);
            std::string_view part = text.substr(pos, dot == std::string_view::npos ? text.npos : dot - pos);
            std::size_t value = 0;
            auto [end, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
            if (part.empty() || ec != std::errc{} || end != part.data() + part.size())
                throw InvalidPath("malformed path '" + std::string(text) + "'");
            p.indices.push_back(value);
            if (dot == std::string_view::npos) break;
            pos = dot + 1;
        }
        return p;
    }

    friend auto operator<=>(const Path&, const Path&) = default;
    friend bool operator==(const Path&, const Path&) = default;
};

// ---------------------------------------------------------------------------
// Expression

/// An AZee tree: rule applications over named production rules, with
/// native leaves (numbers, points, sides).
///
/// Expressions are immutable values. Copies share structure, and edits build
/// a new spine from the root to the edited node.
class Expression {
public:
    static Expression rule(std::string name, std::vector<Expression> children = {}) {
        if (!is_valid_name(name)) throw Error("invalid rule name '" + name + "'");
        auto node = std::make_shared<Node>();
        node->name = std::move(name);
        node->children = std::move(children);
        return Expression(std::move(node));
    }

    static Expression native(NativeValue value) {
        if (auto* p = std::get_if<Point>(&value); p && !is_valid_point_name(p->name))
            throw Error("invalid point name '" + p->name + "'");
        auto node = std::make_shared<Node>();
        node->native = std::move(value);
        return Expression(std::move(node));
    }

    static Expression number(Decimal v) { return native(Number{v}); }
    static Expression point(std::string name) { return native(Point{std::move(name)}); }
    static Expression side(Side s) { return native(s); }

    bool is_rule() const { return !node_->native.has_value(); }
    bool is_native() const { return node_->native.has_value(); }

    /// Rule name; empty for natives.
    const std::string& name() const { return node_->name; }
    std::span<const Expression> children() const { return node_->children; }
    std::size_t arity() const { return node_->children.size(); }
    const NativeValue& native_value() const { return *node_->native; }

    friend bool operator==(const Expression& a, const Expression& b) {
        if (a.node_ == b.node_) return true;
        if (a.node_->native != b.node_->native || a.node_->name != b.node_->name ||
            a.node_->children.size() != b.node_->children.size())
            return false;
        for (std::size_t i = 0; i < a.node_->children.size(); ++i)
            if (!(a.node_->children[i] == b.node_->children[i])) return false;
        return true;
    }

private:
    struct Node {
        std::string name;
        std::vector<Expression> children;
        std::optional<NativeValue> native;
    };

    explicit Expression(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

    std::shared_ptr<const Node> node_;
};

inline bool equal(const Expression& a, const Expression& b) { return a == b; }

inline const Expression& node_at(const Expression& expr, const Path& path) {
    const Expression* cur = &expr;
    for (std::size_t depth = 0; depth < path.indices.size(); ++depth) {
        std::size_t i = path.indices[depth];
        if (i >= cur->arity())
            throw InvalidPath("path '" + path.to_string() + "' leaves the tree at depth " +
                              std::to_string(depth));
        cur = &cur->children()[i];
    }
    return *cur;
}

namespace detail {
inline Expression replace_from(const Expression& expr, const Path& path, std::size_t depth,
                               const Expression& sub) {
    if (depth == path.indices.size()) return sub;
    std::size_t i = path.indices[depth];
    if (i >= expr.arity())
        throw InvalidPath("path '" + path.to_string() + "' leaves the tree at depth " +
                          std::to_string(depth));
    std::vector<Expression> kids(expr.children().begin(), expr.children().end());
    kids[i] = replace_from(kids[i], path, depth + 1, sub);
    return Expression::rule(expr.name(), std::move(kids));
}
}  // namespace detail

/// New tree equal to `expr` except that the subtree at `path` is `sub`.
inline Expression replace_at(const Expression& expr, const Path& path, const Expression& sub) {
    return detail::replace_from(expr, path, 0, sub);
}

inline std::size_t size(const Expression& expr) {
    std::size_t n = 1;
    for (const auto& c : expr.children()) n += size(c);
    return n;
}

inline std::size_t depth(const Expression& expr) {
    std::size_t d = 0;
    for (const auto& c : expr.children()) d = std::max(d, depth(c));
    return d + 1;
}

/// Visits every node in pre-order (root, then children left to right).
inline void for_each_preorder(const Expression& expr,
                              const std::function<void(const Path&, const Expression&)>& fn,
                              Path at = {}) {
    fn(at, expr);
    for (std::size_t i = 0; i < expr.arity(); ++i) for_each_preorder(expr.children()[i], fn, at.child(i));
}

}  // namespace azvd
