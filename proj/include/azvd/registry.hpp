#pragma once

#include <azvd/pattern.hpp>
#include <azvd/score.hpp>

#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace azvd {

enum class ParamType { score, point, number, side };

inline std::string_view to_string(ParamType t) {
    switch (t) {
        case ParamType::score: return "score";
        case ParamType::point: return "point";
        case ParamType::number: return "number";
        case ParamType::side: return "side";
    }
    return "?";
}

inline std::optional<ParamType> param_type_from_string(std::string_view s) {
    for (ParamType t : {ParamType::score, ParamType::point, ParamType::number, ParamType::side})
        if (to_string(t) == s) return t;
    return std::nullopt;
}

inline ParamType native_type(const NativeValue& v) {
    if (std::holds_alternative<Number>(v)) return ParamType::number;
    if (std::holds_alternative<Point>(v)) return ParamType::point;
    return ParamType::side;
}

// ---------------------------------------------------------------------------
// Rule bodies

/// Duration arithmetic: literals, `dur(score-param)`, number params, + and -.
struct DurationExpr {
    enum class Kind { literal, dur_of, param, add, sub };

    Kind kind = Kind::literal;
    Decimal value;
    std::string param;
    std::vector<DurationExpr> operands;

    friend bool operator==(const DurationExpr&, const DurationExpr&) = default;
};

/// Combinator tree a rule evaluates to once its parameters are bound.
struct ScoreTemplate {
    enum class Kind { block, seq, sync, hold, param };

    Kind kind = Kind::param;
    std::vector<Track> tracks;       // block
    std::string label;               // block; may splice `{param}`
    DurationExpr duration;           // block/hold length, sync offset
    std::vector<ScoreTemplate> items;  // seq items; sync base and overlay
    std::string param;               // param

    friend bool operator==(const ScoreTemplate&, const ScoreTemplate&) = default;
};

/// How a rule node is drawn.
struct GlyphSpec {
    enum class Kind { atom, infix, overmark, contextbar, bulletlist, nameframe };

    Kind kind = Kind::nameframe;
    std::u32string codepoints;

    friend bool operator==(const GlyphSpec&, const GlyphSpec&) = default;
};

inline std::string_view to_string(GlyphSpec::Kind k) {
    switch (k) {
        case GlyphSpec::Kind::atom: return "atom";
        case GlyphSpec::Kind::infix: return "infix";
        case GlyphSpec::Kind::overmark: return "overmark";
        case GlyphSpec::Kind::contextbar: return "contextbar";
        case GlyphSpec::Kind::bulletlist: return "bulletlist";
        case GlyphSpec::Kind::nameframe: return "nameframe";
    }
    return "?";
}

struct Param {
    std::string name;
    ParamType type = ParamType::score;
    std::optional<Expression> placeholder;  // used to fill slots when wrapping

    friend bool operator==(const Param&, const Param&) = default;
};

struct VariadicParam {
    std::string name;
    ParamType type = ParamType::score;
    std::size_t min = 1;

    friend bool operator==(const VariadicParam&, const VariadicParam&) = default;
};

struct RuleDef {
    std::string name;
    std::vector<Param> params;
    std::optional<VariadicParam> variadic;
    ScoreTemplate body;
    GlyphSpec glyph;
    std::size_t line = 0;

    std::size_t min_arity() const { return params.size() + (variadic ? variadic->min : 0); }
    bool accepts_arity(std::size_t n) const {
        return variadic ? n >= min_arity() : n == params.size();
    }
    /// Declared type of argument `slot`; nullopt if out of range.
    std::optional<ParamType> slot_type(std::size_t slot) const {
        if (slot < params.size()) return params[slot].type;
        if (variadic) return variadic->type;
        return std::nullopt;
    }

    friend bool operator==(const RuleDef& a, const RuleDef& b) {
        return a.name == b.name && a.params == b.params && a.variadic == b.variadic && a.body == b.body &&
               a.glyph == b.glyph;
    }
};

/// Multi-node pattern drawn as one compound: left and right slots are the
/// pattern's first two variables, joined by a separator.
struct Template {
    std::string name;
    Pattern pattern;
    std::u32string separator;
    std::size_t line = 0;

    std::vector<std::string> slots() const { return pattern_variables(pattern); }

    friend bool operator==(const Template& a, const Template& b) {
        return a.name == b.name && a.pattern == b.pattern && a.separator == b.separator;
    }
};

class Registry {
public:
    const RuleDef* find(std::string_view name) const {
        auto it = rules_.find(std::string(name));
        return it == rules_.end() ? nullptr : &it->second;
    }
    bool has_point(std::string_view name) const { return points_.count(std::string(name)) != 0; }

    /// Rules sorted by name.
    const std::map<std::string, RuleDef>& rules() const { return rules_; }
    const std::vector<std::string>& points() const { return point_order_; }
    const std::vector<Template>& templates() const { return templates_; }
    const std::vector<std::string>& declaration_order() const { return rule_order_; }

    friend bool operator==(const Registry& a, const Registry& b) {
        return a.rules_ == b.rules_ && a.point_order_ == b.point_order_ && a.templates_ == b.templates_;
    }

private:
    friend class RegistryReader;

    std::map<std::string, RuleDef> rules_;
    std::vector<std::string> rule_order_;
    std::set<std::string> points_;
    std::vector<std::string> point_order_;
    std::vector<Template> templates_;
};

// ---------------------------------------------------------------------------
// Type checking

class TypeError : public Error {
public:
    TypeError(std::string what, Path path)
        : Error(what + (path.empty() ? std::string(" at the root") : " at path " + path.to_string())), path_(std::move(path)) {}
    const Path& path() const { return path_; }

private:
    Path path_;
};

class UnknownRule : public TypeError {
public:
    using TypeError::TypeError;
};
class ArityMismatch : public TypeError {
public:
    using TypeError::TypeError;
};
class TypeMismatch : public TypeError {
public:
    using TypeError::TypeError;
};
class UnknownPoint : public TypeError {
public:
    using TypeError::TypeError;
};

namespace detail {
inline ParamType type_check_at(const Registry& reg, const Expression& expr, const Path& at) {
    if (expr.is_native()) {
        const auto& v = expr.native_value();
        if (auto* p = std::get_if<Point>(&v); p && !reg.has_point(p->name))
            throw UnknownPoint("unknown point '" + p->name + "'", at);
        return native_type(v);
    }
    const RuleDef* rule = reg.find(expr.name());
    if (!rule) throw UnknownRule("unknown rule '" + expr.name() + "'", at);
    if (!rule->accepts_arity(expr.arity()))
        throw ArityMismatch("'" + rule->name + "' expects " + (rule->variadic ? "at least " : "") +
                                std::to_string(rule->min_arity()) + " argument(s), got " +
                                std::to_string(expr.arity()),
                            at);
    for (std::size_t i = 0; i < expr.arity(); ++i) {
        Path child = at.child(i);
        ParamType got = type_check_at(reg, expr.children()[i], child);
        ParamType want = *rule->slot_type(i);
        if (got != want)
            throw TypeMismatch("argument " + std::to_string(i) + " of '" + rule->name + "' must be " +
                                   std::string(to_string(want)) + ", got " + std::string(to_string(got)),
                               child);
    }
    return ParamType::score;
}
}  // namespace detail

/// Result type of `expr`; throws a TypeError subclass carrying the offending path.
inline ParamType type_check(const Registry& reg, const Expression& expr) {
    return detail::type_check_at(reg, expr, {});
}

// ---------------------------------------------------------------------------
// Registry file reader

class RegistryError : public Error {
public:
    RegistryError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line), reason_(what) {}
    std::size_t line() const { return line_; }
    /// The message without the line prefix.
    const std::string& reason() const { return reason_; }

private:
    std::size_t line_;
    std::string reason_;
};

/// Splits a form label into literal text and `{param}` references.
/// Returns nullopt on an unbalanced brace.
inline std::optional<std::vector<std::pair<bool, std::string>>> split_label(std::string_view label) {
    std::vector<std::pair<bool, std::string>> parts;
    std::string lit;
    for (std::size_t i = 0; i < label.size(); ++i) {
        if (label[i] == '{') {
            std::size_t close = label.find('}', i);
            if (close == std::string_view::npos) return std::nullopt;
            if (!lit.empty()) parts.emplace_back(false, std::move(lit));
            lit.clear();
            parts.emplace_back(true, std::string(label.substr(i + 1, close - i - 1)));
            i = close;
        } else if (label[i] == '}') {
            return std::nullopt;
        } else {
            lit += label[i];
        }
    }
    if (!lit.empty()) parts.emplace_back(false, std::move(lit));
    return parts;
}

class RegistryReader {
public:
    explicit RegistryReader(std::string_view text) : text_(text), in_(text) {}

    Registry read() {
        skip();
        while (!in_.at_end()) {
            decl_line_ = line_of(in_.offset());
            if (in_.at_word("point")) {
                in_.advance(5);
                skip();
                std::size_t at = in_.offset();
                std::string name = guard([&] { return in_.read_point_name(); });
                if (reg_.points_.count(name)) fail_at(at, "duplicate point '" + name + "'");
                reg_.points_.insert(name);
                reg_.point_order_.push_back(name);
            } else if (in_.at_word("rule")) {
                in_.advance(4);
                read_rule();
            } else if (in_.at_word("template")) {
                in_.advance(8);
                read_template();
            } else {
                fail("'point', 'rule' or 'template'");
            }
            skip();
        }
        validate();
        return std::move(reg_);
    }

private:
    std::size_t line_of(std::size_t offset) const {
        return 1 + static_cast<std::size_t>(std::count(text_.begin(), text_.begin() + std::min(offset, text_.size()), '\n'));
    }

    [[noreturn]] void fail_at(std::size_t offset, const std::string& what) const {
        throw RegistryError(line_of(offset), what);
    }
    [[noreturn]] void fail(const std::string& expected) const {
        std::string found = in_.at_end() ? "end of input" : "'" + std::string(1, in_.peek()) + "'";
        fail_at(in_.offset(), "expected " + expected + ", found " + found);
    }

    /// Runs a Scanner-based read, turning ParseError into RegistryError.
    template <class F>
    auto guard(F&& f) -> decltype(f()) {
        try {
            return f();
        } catch (const ParseError& e) {
            throw RegistryError(line_of(e.offset()), "expected " + e.expected() +
                                                         (e.found().empty() ? "" : ", found '" + e.found() + "'"));
        }
    }

    /// Whitespace and `#` comments (but not `#left` / `#right`).
    void skip() {
        while (true) {
            in_.skip_ws();
            if (in_.peek() == '#' && !in_.at_end()) {
                std::string_view r = in_.rest();
                bool side = (r.substr(1, 4) == "left" && !detail::is_name_char(in_.peek(5))) ||
                            (r.substr(1, 5) == "right" && !detail::is_name_char(in_.peek(6)));
                if (side) return;
                while (!in_.at_end() && in_.peek() != '\n') in_.advance();
                continue;
            }
            return;
        }
    }

    void expect(char c) {
        skip();
        if (in_.at_end() || in_.peek() != c) fail(std::string("'") + c + "'");
        in_.advance();
    }
    bool accept(char c) {
        skip();
        return in_.accept(c);
    }
    std::string name(std::string_view what) {
        skip();
        return guard([&] { return in_.read_name(what); });
    }

    std::string read_string() {
        skip();
        if (in_.peek() != '"' || in_.at_end()) fail("string literal");
        in_.advance();
        std::string out;
        while (true) {
            if (in_.at_end() || in_.peek() == '\n') fail("closing '\"'");
            char c = in_.peek();
            in_.advance();
            if (c == '"') break;
            if (c == '\\') {
                if (in_.at_end()) fail("escaped character");
                c = in_.peek();
                in_.advance();
            }
            out += c;
        }
        return out;
    }

    std::u32string read_codepoints() {
        std::size_t at = in_.offset();
        std::string text = read_string();
        std::u32string out;
        std::size_t i = 0;
        while (i < text.size()) {
            if (text[i] == ' ') {
                ++i;
                continue;
            }
            if (text.compare(i, 2, "U+") != 0) fail_at(at, "codepoints must be written U+XXXX");
            i += 2;
            std::size_t begin = i;
            char32_t cp = 0;
            while (i < text.size() && std::isxdigit(static_cast<unsigned char>(text[i]))) {
                cp = cp * 16 + static_cast<char32_t>(std::stoi(std::string(1, text[i]), nullptr, 16));
                ++i;
                if (i - begin > 6) fail_at(at, "codepoint too long");
            }
            if (i == begin || (i < text.size() && text[i] != ' ')) fail_at(at, "malformed codepoint");
            if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) fail_at(at, "invalid codepoint");
            out += cp;
        }
        if (out.empty()) fail_at(at, "empty codepoint string");
        return out;
    }

    ParamType read_type() {
        std::size_t at = (skip(), in_.offset());
        std::string t = name("parameter type");
        auto type = param_type_from_string(t);
        if (!type) fail_at(at, "unknown parameter type '" + t + "'");
        return *type;
    }

    void read_rule() {
        RuleDef rule;
        rule.line = decl_line_;
        skip();
        std::size_t name_at = in_.offset();
        rule.name = name("rule name");
        if (reg_.rules_.count(rule.name)) fail_at(name_at, "duplicate rule '" + rule.name + "'");

        std::set<std::string> seen;
        expect('(');
        if (!accept(')')) {
            while (true) {
                skip();
                std::size_t at = in_.offset();
                std::string pname = name("parameter name");
                if (!seen.insert(pname).second) fail_at(at, "duplicate parameter '" + pname + "'");
                expect(':');
                ParamType type = read_type();
                skip();
                if (in_.rest().substr(0, 3) == "...") {
                    in_.advance(3);
                    VariadicParam v{pname, type, 1};
                    skip();
                    if (in_.at_word("min")) {
                        in_.advance(3);
                        skip();
                        std::size_t num_at = in_.offset();
                        Decimal n = guard([&] { return in_.read_number(); });
                        if (n.is_negative() || n.units() % Decimal::kScale != 0)
                            fail_at(num_at, "minimum count must be a non-negative integer");
                        v.min = static_cast<std::size_t>(n.units() / Decimal::kScale);
                    }
                    rule.variadic = v;
                    expect(')');
                    break;
                }
                Param p{pname, type, std::nullopt};
                if (accept('=')) {
                    skip();
                    p.placeholder = guard([&] {
                        return detail::read_tree<Expression>(
                            in_, [](std::string n, std::vector<Expression> k) { return Expression::rule(std::move(n), std::move(k)); },
                            [](NativeValue v) { return Expression::native(std::move(v)); },
                            [](detail::Scanner&) { return std::optional<Expression>{}; });
                    });
                    placeholder_lines_.emplace_back(rule.name, p.name, decl_line_);
                }
                rule.params.push_back(std::move(p));
                if (accept(')')) break;
                expect(',');
            }
        }
        expect('=');
        rule.body = read_score(rule);
        skip();
        if (in_.at_word("glyph")) {
            in_.advance(5);
            read_glyph(rule);
        }
        check_glyph_arity(rule);
        reg_.rule_order_.push_back(rule.name);
        reg_.rules_.emplace(rule.name, std::move(rule));
    }

    const Param* find_param(const RuleDef& rule, const std::string& n) const {
        for (const auto& p : rule.params)
            if (p.name == n) return &p;
        return nullptr;
    }

    /// Type of parameter `n`; fails with "unbound" if undeclared.
    ParamType param_type(const RuleDef& rule, const std::string& n, std::size_t at) const {
        if (const Param* p = find_param(rule, n)) return p->type;
        if (rule.variadic && rule.variadic->name == n) return rule.variadic->type;
        fail_at(at, "unbound parameter '" + n + "' in body of '" + rule.name + "'");
    }

    ScoreTemplate read_score(const RuleDef& rule) {
        skip();
        std::size_t at = in_.offset();
        std::string word = name("score expression");
        skip();
        ScoreTemplate st;
        if (in_.peek() != '(' || in_.at_end()) {
            if (param_type(rule, word, at) != ParamType::score)
                fail_at(at, "parameter '" + word + "' is not a score");
            st.kind = ScoreTemplate::Kind::param;
            st.param = word;
            return st;
        }
        in_.advance();
        if (word == "block") {
            st.kind = ScoreTemplate::Kind::block;
            expect('{');
            do {
                skip();
                std::size_t tat = in_.offset();
                std::string tname = name("track name");
                auto track = track_from_string(tname);
                if (!track) fail_at(tat, "unknown track '" + tname + "'");
                if (std::find(st.tracks.begin(), st.tracks.end(), *track) == st.tracks.end())
                    st.tracks.push_back(*track);
            } while (accept(','));
            expect('}');
            expect(',');
            skip();
            std::size_t label_at = in_.offset();
            st.label = read_string();
            auto parts = split_label(st.label);
            if (!parts) fail_at(label_at, "unbalanced '{' in label");
            for (const auto& [is_ref, text] : *parts) {
                if (!is_ref) continue;
                if (param_type(rule, text, label_at) == ParamType::score)
                    fail_at(label_at, "score parameter '" + text + "' cannot be spliced into a label");
                if (rule.variadic && rule.variadic->name == text)
                    fail_at(label_at, "variadic parameter '" + text + "' cannot be spliced into a label");
            }
            expect(',');
            st.duration = read_duration(rule);
        } else if (word == "seq") {
            st.kind = ScoreTemplate::Kind::seq;
            do st.items.push_back(read_score(rule));
            while (accept(','));
        } else if (word == "sync") {
            st.kind = ScoreTemplate::Kind::sync;
            st.items.push_back(read_score(rule));
            expect(',');
            st.items.push_back(read_score(rule));
            expect(',');
            st.duration = read_duration(rule);
        } else if (word == "hold") {
            st.kind = ScoreTemplate::Kind::hold;
            st.duration = read_duration(rule);
        } else {
            fail_at(at, "unknown combinator '" + word + "'");
        }
        expect(')');
        return st;
    }

    DurationExpr read_duration(const RuleDef& rule) {
        DurationExpr lhs = read_duration_term(rule);
        while (true) {
            skip();
            char c = in_.peek();
            if (in_.at_end() || (c != '+' && c != '-')) return lhs;
            in_.advance();
            DurationExpr node;
            node.kind = c == '+' ? DurationExpr::Kind::add : DurationExpr::Kind::sub;
            node.operands.push_back(std::move(lhs));
            node.operands.push_back(read_duration_term(rule));
            lhs = std::move(node);
        }
    }

    DurationExpr read_duration_term(const RuleDef& rule) {
        skip();
        DurationExpr d;
        char c = in_.peek();
        if (c == '(') {
            in_.advance();
            d = read_duration(rule);
            expect(')');
            return d;
        }
        if (c == '-' && !(in_.peek(1) >= '0' && in_.peek(1) <= '9')) {
            in_.advance();
            d.kind = DurationExpr::Kind::sub;
            d.operands.push_back(DurationExpr{});
            d.operands.push_back(read_duration_term(rule));
            return d;
        }
        if (c == '-' || (c >= '0' && c <= '9')) {
            d.kind = DurationExpr::Kind::literal;
            d.value = guard([&] { return in_.read_number(); });
            return d;
        }
        std::size_t at = in_.offset();
        std::string word = name("duration");
        skip();
        if (word == "dur" && in_.peek() == '(') {
            in_.advance();
            skip();
            std::size_t pat = in_.offset();
            d.kind = DurationExpr::Kind::dur_of;
            d.param = name("parameter name");
            if (param_type(rule, d.param, pat) != ParamType::score)
                fail_at(pat, "dur() needs a score parameter, '" + d.param + "' is not one");
            expect(')');
            return d;
        }
        if (param_type(rule, word, at) != ParamType::number ||
            (rule.variadic && rule.variadic->name == word))
            fail_at(at, "parameter '" + word + "' is not a number");
        d.kind = DurationExpr::Kind::param;
        d.param = word;
        return d;
    }

    void read_glyph(RuleDef& rule) {
        std::size_t at = (skip(), in_.offset());
        std::string kind = name("glyph kind");
        using K = GlyphSpec::Kind;
        static const std::map<std::string, std::pair<K, bool>> kinds = {
            {"atom", {K::atom, true}},         {"infix", {K::infix, true}},
            {"overmark", {K::overmark, true}}, {"contextbar", {K::contextbar, false}},
            {"bulletlist", {K::bulletlist, true}}, {"nameframe", {K::nameframe, false}}};
        auto it = kinds.find(kind);
        if (it == kinds.end()) fail_at(at, "unknown glyph kind '" + kind + "'");
        rule.glyph.kind = it->second.first;
        if (it->second.second) rule.glyph.codepoints = read_codepoints();
    }

    void check_glyph_arity(const RuleDef& rule) const {
        using K = GlyphSpec::Kind;
        const std::size_t fixed = rule.params.size();
        const bool var = rule.variadic.has_value();
        bool ok = true;
        switch (rule.glyph.kind) {
            case K::atom: ok = fixed == 0 && !var; break;
            case K::infix:
            case K::contextbar: ok = fixed == 2 && !var; break;
            case K::overmark: ok = fixed == 1 && !var; break;
            case K::bulletlist: ok = fixed == 0 && var; break;
            case K::nameframe: break;
        }
        if (!ok)
            throw RegistryError(rule.line, "glyph '" + std::string(to_string(rule.glyph.kind)) +
                                               "' does not fit the parameters of '" + rule.name + "'");
    }

    void read_template() {
        Template t;
        t.line = decl_line_;
        t.name = name("template name");
        for (const auto& other : reg_.templates_)
            if (other.name == t.name) throw RegistryError(t.line, "duplicate template '" + t.name + "'");
        expect('=');
        skip();
        t.pattern = guard([&] { return detail::read_pattern(in_); });
        skip();
        if (!in_.at_word("glyph")) fail("'glyph'");
        in_.advance(5);
        std::size_t at = (skip(), in_.offset());
        std::string kind = name("template glyph kind");
        if (kind != "sidebyside") fail_at(at, "unknown template glyph '" + kind + "'");
        t.separator = read_codepoints();
        reg_.templates_.push_back(std::move(t));
    }

    void check_pattern_refs(const Pattern& p, const Template& t) const {
        if (p.kind == Pattern::Kind::rule && !reg_.find(p.name))
            throw RegistryError(t.line, "template '" + t.name + "' references undeclared rule '" + p.name + "'");
        if (p.kind == Pattern::Kind::native)
            if (auto* pt = std::get_if<Point>(&*p.native); pt && !reg_.has_point(pt->name))
                throw RegistryError(t.line, "template '" + t.name + "' references undeclared point '" + pt->name + "'");
        for (const auto& c : p.children) check_pattern_refs(c, t);
    }

    void validate() const {
        for (const auto& t : reg_.templates_) {
            if (t.pattern.kind != Pattern::Kind::rule)
                throw RegistryError(t.line, "template '" + t.name + "' must be rooted at a rule");
            check_pattern_refs(t.pattern, t);
            if (t.slots().size() != 2)
                throw RegistryError(t.line, "template '" + t.name + "' needs exactly two pattern variables");
        }
        for (const auto& [rule_name, param_name, line] : placeholder_lines_) {
            const RuleDef& rule = reg_.rules_.at(rule_name);
            const Param& p = *find_param(rule, param_name);
            try {
                if (type_check(reg_, *p.placeholder) != p.type)
                    throw RegistryError(line, "placeholder for '" + param_name + "' has the wrong type");
            } catch (const TypeError& e) {
                throw RegistryError(line, "placeholder for '" + param_name + "': " + e.what());
            }
        }
    }

    std::string_view text_;
    detail::Scanner in_;
    Registry reg_;
    std::size_t decl_line_ = 1;
    std::vector<std::tuple<std::string, std::string, std::size_t>> placeholder_lines_;
};

inline Registry load_registry(std::string_view text) { return RegistryReader(text).read(); }

// ---------------------------------------------------------------------------
// Registry serializer

namespace detail {
inline std::string print_codepoints(const std::u32string& cps) {
    std::string out = "\"";
    for (std::size_t i = 0; i < cps.size(); ++i) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%sU+%04X", i ? " " : "", static_cast<unsigned>(cps[i]));
        out += buf;
    }
    return out + "\"";
}

inline std::string print_duration(const DurationExpr& d) {
    switch (d.kind) {
        case DurationExpr::Kind::literal: return d.value.to_string();
        case DurationExpr::Kind::dur_of: return "dur(" + d.param + ")";
        case DurationExpr::Kind::param: return d.param;
        case DurationExpr::Kind::add:
        case DurationExpr::Kind::sub: {
            std::string rhs = print_duration(d.operands[1]);
            if (d.operands[1].kind == DurationExpr::Kind::add || d.operands[1].kind == DurationExpr::Kind::sub)
                rhs = "(" + rhs + ")";
            return print_duration(d.operands[0]) + (d.kind == DurationExpr::Kind::add ? " + " : " - ") + rhs;
        }
    }
    return {};
}

inline std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

inline std::string print_score_template(const ScoreTemplate& st) {
    switch (st.kind) {
        case ScoreTemplate::Kind::param: return st.param;
        case ScoreTemplate::Kind::hold: return "hold(" + print_duration(st.duration) + ")";
        case ScoreTemplate::Kind::block: {
            std::string out = "block({";
            for (std::size_t i = 0; i < st.tracks.size(); ++i) {
                if (i) out += ',';
                out += to_string(st.tracks[i]);
            }
            return out + "}, " + quote(st.label) + ", " + print_duration(st.duration) + ")";
        }
        case ScoreTemplate::Kind::seq: {
            std::string out = "seq(";
            for (std::size_t i = 0; i < st.items.size(); ++i) {
                if (i) out += ", ";
                out += print_score_template(st.items[i]);
            }
            return out + ")";
        }
        case ScoreTemplate::Kind::sync:
            return "sync(" + print_score_template(st.items[0]) + ", " + print_score_template(st.items[1]) + ", " +
                   print_duration(st.duration) + ")";
    }
    return {};
}
}  // namespace detail

/// Registry text that `load_registry` reads back to an equal Registry.
inline std::string print_registry(const Registry& reg) {
    std::string out;
    for (const auto& p : reg.points()) out += "point " + p + "\n";
    for (const auto& name : reg.declaration_order()) {
        const RuleDef& r = *reg.find(name);
        out += "rule " + r.name + "(";
        for (std::size_t i = 0; i < r.params.size(); ++i) {
            if (i) out += ", ";
            out += r.params[i].name + ": " + std::string(to_string(r.params[i].type));
            if (r.params[i].placeholder) out += " = " + print_canonical(*r.params[i].placeholder);
        }
        if (r.variadic) {
            if (!r.params.empty()) out += ", ";
            out += r.variadic->name + ": " + std::string(to_string(r.variadic->type)) + "... min " +
                   std::to_string(r.variadic->min);
        }
        out += ") = " + detail::print_score_template(r.body) + " glyph " + std::string(to_string(r.glyph.kind));
        if (!r.glyph.codepoints.empty()) out += " " + detail::print_codepoints(r.glyph.codepoints);
        out += "\n";
    }
    for (const auto& t : reg.templates())
        out += "template " + t.name + " = " + print_pattern(t.pattern) + " glyph sidebyside " +
               detail::print_codepoints(t.separator) + "\n";
    return out;
}

}  // namespace azvd
