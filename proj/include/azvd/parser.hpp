#pragma once

#include <azvd/expression.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace azvd {

/// Malformed expression text. `offset` is a byte position into the input.
class ParseError : public Error {
public:
    ParseError(std::size_t offset, std::string expected, std::string found)
        : Error("offset " + std::to_string(offset) + ": " + describe(expected, found)), offset_(offset),
          expected_(std::move(expected)), found_(std::move(found)) {}

    /// The message without its offset prefix.
    std::string reason() const { return describe(expected_, found_); }

    std::size_t offset() const { return offset_; }
    const std::string& expected() const { return expected_; }
    const std::string& found() const { return found_; }

private:
    static std::string describe(const std::string& expected, const std::string& found) {
        return "expected " + expected + (found.empty() ? ", found end of input" : ", found '" + found + "'");
    }

    std::size_t offset_;
    std::string expected_;
    std::string found_;
};

namespace detail {

inline bool is_name_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-';
}

/// Byte cursor shared by the expression, pattern and registry readers.
class Scanner {
public:
    explicit Scanner(std::string_view text) : text_(text) {}

    std::size_t offset() const { return pos_; }
    bool at_end() const { return pos_ >= text_.size(); }
    char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
    }
    void advance(std::size_t n = 1) { pos_ = std::min(pos_ + n, text_.size()); }
    std::string_view rest() const { return text_.substr(pos_); }

    void skip_ws() {
        while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\n' || peek() == '\r')) ++pos_;
    }

    [[noreturn]] void fail(std::string expected) const { fail_at(pos_, std::move(expected)); }

    [[noreturn]] void fail_at(std::size_t at, std::string expected) const {
        std::string found;
        if (at < text_.size()) {
            // Whole UTF-8 sequence, then any following name characters.
            std::size_t end = at + 1;
            while (end < text_.size() && (static_cast<unsigned char>(text_[end]) & 0xC0) == 0x80) ++end;
            if (is_name_char(text_[at]))
                while (end < text_.size() && is_name_char(text_[end]) && end - at < 24) ++end;
            found = std::string(text_.substr(at, end - at));
        }
        throw ParseError(at, std::move(expected), std::move(found));
    }

    void expect(char c) {
        if (peek() != c || at_end()) fail(std::string("'") + c + "'");
        ++pos_;
    }

    bool accept(char c) {
        if (at_end() || peek() != c) return false;
        ++pos_;
        return true;
    }

    /// True if the input continues with `word` not followed by a name character.
    bool at_word(std::string_view word) const {
        return rest().substr(0, word.size()) == word && !is_name_char(peek(word.size()));
    }

    /// `[a-z][a-z0-9-]*`
    std::string read_name(std::string_view what = "name") {
        if (!(peek() >= 'a' && peek() <= 'z')) fail(std::string(what));
        std::size_t begin = pos_;
        while (!at_end() && is_name_char(peek())) {
            if (peek() >= 'A' && peek() <= 'Z') fail("lower-case name character");
            ++pos_;
        }
        return std::string(text_.substr(begin, pos_ - begin));
    }

    /// `[A-Za-z][A-Za-z0-9-]*`
    std::string read_point_name() {
        char c = peek();
        if (!((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'))) fail("point name");
        std::size_t begin = pos_;
        while (!at_end() && is_name_char(peek())) ++pos_;
        return std::string(text_.substr(begin, pos_ - begin));
    }

    /// `["-"] digits ["." digits]`
    Decimal read_number() {
        std::size_t begin = pos_;
        accept('-');
        if (!(peek() >= '0' && peek() <= '9')) fail("digit");
        while (peek() >= '0' && peek() <= '9' && !at_end()) ++pos_;
        if (peek() == '.' && !at_end()) {
            ++pos_;
            if (!(peek() >= '0' && peek() <= '9')) fail("digit after '.'");
            while (peek() >= '0' && peek() <= '9' && !at_end()) ++pos_;
        }
        auto value = Decimal::parse(text_.substr(begin, pos_ - begin));
        if (!value) fail_at(begin, "number with at most 9 fractional digits");
        return *value;
    }

    /// `@name`, `#left`, `#right`, or a number; nullopt if none starts here.
    std::optional<NativeValue> read_native() {
        char c = peek();
        if (c == '@') {
            advance();
            return Point{read_point_name()};
        }
        if (c == '#') {
            if (rest().substr(1, 4) == "left" && !is_name_char(peek(5))) {
                advance(5);
                return Side::left;
            }
            if (rest().substr(1, 5) == "right" && !is_name_char(peek(6))) {
                advance(6);
                return Side::right;
            }
            advance();
            fail("'left' or 'right' after '#'");
        }
        if (c == '-' || (c >= '0' && c <= '9')) return Number{read_number()};
        return std::nullopt;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

/// Recursive-descent reader for the expression grammar, parameterised over
/// the tree type it builds and an optional extra-leaf hook (used for
/// pattern wildcards and variables).
template <class Tree, class MakeRule, class MakeNative, class ExtraLeaf>
Tree read_tree(Scanner& in, MakeRule&& make_rule, MakeNative&& make_native, ExtraLeaf&& extra_leaf) {
    in.skip_ws();
    if (std::optional<Tree> leaf = extra_leaf(in)) return std::move(*leaf);
    if (auto native = in.read_native()) return make_native(std::move(*native));
    char c = in.peek();
    if (in.at_end() || !(c >= 'a' && c <= 'z')) in.fail("expression");
    std::string name = in.read_name("rule name");
    in.skip_ws();
    in.expect('(');
    std::vector<Tree> children;
    in.skip_ws();
    if (!in.accept(')')) {
        while (true) {
            children.push_back(read_tree<Tree>(in, make_rule, make_native, extra_leaf));
            in.skip_ws();
            if (in.accept(')')) break;
            if (!in.accept(',')) in.fail("',' or ')'");
        }
    }
    return make_rule(std::move(name), std::move(children));
}

}  // namespace detail

/// Parses one expression; surrounding whitespace is allowed.
inline Expression parse(std::string_view text) {
    detail::Scanner in(text);
    Expression e = detail::read_tree<Expression>(
        in, [](std::string name, std::vector<Expression> kids) { return Expression::rule(std::move(name), std::move(kids)); },
        [](NativeValue v) { return Expression::native(std::move(v)); },
        [](detail::Scanner&) { return std::optional<Expression>{}; });
    in.skip_ws();
    if (!in.at_end()) in.fail("end of input");
    return e;
}

/// Offset in `text` where the node at `path` starts.
inline std::size_t source_offset(std::string_view text, const Path& path) {
    struct Located {
        std::size_t at = 0;
        std::vector<Located> kids;
    };
    std::vector<std::size_t> starts;
    detail::Scanner in(text);
    auto pop = [&] {
        std::size_t at = starts.back();
        starts.pop_back();
        return at;
    };
    Located root = detail::read_tree<Located>(
        in, [&](std::string, std::vector<Located> kids) { return Located{pop(), std::move(kids)}; },
        [&](NativeValue) { return Located{pop(), {}}; },
        [&](detail::Scanner& s) {
            starts.push_back(s.offset());
            return std::optional<Located>{};
        });
    const Located* node = &root;
    for (std::size_t i : path.indices) {
        if (i >= node->kids.size()) throw InvalidPath("path " + path.to_string() + " is not in the text");
        node = &node->kids[i];
    }
    return node->at;
}

inline std::string print_native(const NativeValue& value) {
    if (auto* n = std::get_if<Number>(&value)) return n->value.to_string();
    if (auto* p = std::get_if<Point>(&value)) return "@" + p->name;
    return "#" + std::string(to_string(std::get<Side>(value)));
}

inline void print_canonical(const Expression& expr, std::string& out) {
    if (expr.is_native()) {
        out += print_native(expr.native_value());
        return;
    }
    out += expr.name();
    out += '(';
    for (std::size_t i = 0; i < expr.arity(); ++i) {
        if (i) out += ", ";
        print_canonical(expr.children()[i], out);
    }
    out += ')';
}

inline std::string print_canonical(const Expression& expr) {
    std::string out;
    print_canonical(expr, out);
    return out;
}

}  // namespace azvd
