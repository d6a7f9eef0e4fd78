#pragma once

// Random generators and independent oracles shared by the test suites.
// Nothing here calls the evaluation, matching or layout code it is used to check.

#include <azvd/azvd.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace azvd::testing {

inline const Expression& e1() {
    static const Expression e = Expression::rule(
        "info-about", {Expression::rule("dog"),
                       Expression::rule("non-subjectivity", {Expression::rule("nice-kind")})});
    return e;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// Generators

/// Arbitrary trees with no registry constraints, for parser round trips.
inline Expression random_tree(std::mt19937_64& rng, int max_depth) {
    static const std::vector<std::string> names = {"dog", "nice-kind", "info-about", "a", "x-1", "each-of",
                                                   "z9", "non-subjectivity", "k-k-k"};
    static const std::vector<std::string> points = {"Lssp", "Rssp", "abdomen-hi", "p", "Q-2"};
    std::uniform_int_distribution<int> pick(0, 9);
    const int r = pick(rng);
    if (max_depth <= 1 || r < 3) {
        switch (r % 4) {
            case 0: {
                std::uniform_int_distribution<std::int64_t> units(-5'000'000'000'000LL, 5'000'000'000'000LL);
                std::int64_t u = units(rng);
                // Vary the number of significant fractional digits.
                static const std::int64_t mods[] = {1, 10, 1000, 1'000'000, 1'000'000'000};
                u -= u % mods[static_cast<std::size_t>(pick(rng)) % 5];
                return Expression::number(Decimal::from_units(u));
            }
            case 1: return Expression::point(points[static_cast<std::size_t>(pick(rng)) % points.size()]);
            case 2: return Expression::side(pick(rng) % 2 ? Side::left : Side::right);
            default: return Expression::rule(names[static_cast<std::size_t>(pick(rng)) % names.size()]);
        }
    }
    std::uniform_int_distribution<int> arity(0, 3);
    std::vector<Expression> kids;
    for (int k = arity(rng); k > 0; --k) kids.push_back(random_tree(rng, max_depth - 1));
    return Expression::rule(names[static_cast<std::size_t>(pick(rng)) % names.size()], std::move(kids));
}

/// Well-typed trees for a registry. Rules with score arguments are only
/// chosen while depth remains.
class TypedGenerator {
public:
    TypedGenerator(const Registry& reg, std::uint64_t seed) : reg_(reg), rng_(seed) {
        for (const auto& [name, rule] : reg.rules()) {
            bool needs_score = rule.variadic ? rule.variadic->type == ParamType::score : false;
            for (const auto& p : rule.params) needs_score |= p.type == ParamType::score;
            (needs_score ? branching_ : leaves_).push_back(&rule);
        }
    }

    Expression score(int max_depth) {
        std::uniform_int_distribution<int> coin(0, 99);
        const bool leaf = max_depth <= 1 || branching_.empty() || (coin(rng_) < 30 && !leaves_.empty());
        const auto& pool = leaf ? leaves_ : branching_;
        const RuleDef& rule = *pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng_)];
        std::vector<Expression> kids;
        for (const auto& p : rule.params) kids.push_back(value(p.type, max_depth - 1));
        if (rule.variadic) {
            std::size_t n = rule.variadic->min + std::uniform_int_distribution<std::size_t>(0, 2)(rng_);
            for (std::size_t i = 0; i < n; ++i) kids.push_back(value(rule.variadic->type, max_depth - 1));
        }
        return Expression::rule(rule.name, std::move(kids));
    }

    Expression value(ParamType t, int max_depth) {
        switch (t) {
            case ParamType::score: return score(max_depth);
            case ParamType::point: {
                const auto& pts = reg_.points();
                return Expression::point(pts[std::uniform_int_distribution<std::size_t>(0, pts.size() - 1)(rng_)]);
            }
            case ParamType::side: return Expression::side(std::uniform_int_distribution<int>(0, 1)(rng_) ? Side::left : Side::right);
            case ParamType::number: {
                // 0 to 2 seconds in steps of 0.05
                return Expression::number(Decimal::from_units(
                    std::uniform_int_distribution<std::int64_t>(0, 40)(rng_) * 50'000'000));
            }
        }
        return Expression::rule("dog");
    }

    std::mt19937_64& rng() { return rng_; }

private:
    const Registry& reg_;
    std::mt19937_64 rng_;
    std::vector<const RuleDef*> leaves_;
    std::vector<const RuleDef*> branching_;
};

/// Registry exercising every combinator: pauses, number and side
/// parameters, negative and positive sync offsets, variadics.
inline constexpr std::string_view kAlgebraRegistryText = R"azr(
point Lssp
point Rssp
point chest
rule a() = block({rhand}, "a", 0.5) glyph atom "U+0041"
rule b() = block({lhand,rhand}, "b", 1.25) glyph atom "U+0042"
rule m() = block({mouth}, "m", 0.3)
rule scar(p1: point, p2: point) = block({rhand}, "scar:{p1}->{p2}", 1.2)
rule pause-after(x: score, n: number) = seq(x, hold(n))
rule delayed(n: number, x: score) = seq(hold(n), x)
rule lead(x: score) = sync(x, block({brows}, "raise", 0.4), -0.25)
rule tail(x: score, s: side) = sync(x, block({head}, "nod-{s}", 0.5), dur(x) - 0.2)
rule gaze-at(p: point, x: score) = sync(block({gaze}, "look:{p}", 0.35), x, 0.1)
rule both(x: score, y: score) = seq(x, y) glyph contextbar
rule list(xs: score... min 1) = seq(xs) glyph bulletlist "U+2022"
rule overlap(x: score, y: score) = sync(x, y, dur(x) - 0.5)
rule stretch(n: number) = block({torso}, "lean", n + 0.1)
rule twice(x: score) = seq(x, hold(0.1), x) glyph overmark "U+0303"
rule pair(x: score, y: score) = seq(x, y) glyph infix "U+002B"
template mirror = list(gaze-at(@Lssp, ?l), gaze-at(@Rssp, ?r)) glyph sidebyside "U+2194"
)azr";

inline const Registry& algebra_registry() {
    static const Registry reg = load_registry(kAlgebraRegistryText);
    return reg;
}

// ---------------------------------------------------------------------------
// Score oracle: places every block directly at absolute time, then shifts
// once at the end.

struct AbsoluteBlock {
    Track track;
    Decimal start, end;
    std::string label;
};

struct OracleResult {
    bool failed = false;
    Decimal duration;
    std::vector<AbsoluteBlock> blocks;  // per track, sorted by start, after the final shift
};

class ScoreOracle {
public:
    explicit ScoreOracle(const Registry& reg) : reg_(reg) {}

    OracleResult run(const Expression& expr) {
        failed_ = false;
        std::vector<AbsoluteBlock> blocks;
        Extent ext = place_expr(expr, Decimal{}, &blocks);
        OracleResult r;
        std::stable_sort(blocks.begin(), blocks.end(), [](const auto& x, const auto& y) {
            return x.track != y.track ? x.track < y.track : x.start < y.start;
        });
        for (std::size_t k = 1; k < blocks.size(); ++k)
            if (blocks[k].track == blocks[k - 1].track && blocks[k].start < blocks[k - 1].end) failed_ = true;
        r.failed = failed_;
        if (failed_) return r;
        Decimal first = ext.empty ? Decimal{} : ext.lo;
        if (!blocks.empty()) {
            first = blocks.front().start;
            for (const auto& b : blocks) first = std::min(first, b.start);
        }
        r.duration = ext.empty ? Decimal{} : ext.hi - first;
        for (auto b : blocks) {
            b.start -= first;
            b.end -= first;
            r.blocks.push_back(b);
        }
        return r;
    }

private:
    struct Extent {
        bool empty = true;
        Decimal lo, hi;
        Decimal length() const { return empty ? Decimal{} : hi - lo; }
    };

    using Arg = std::variant<Expression, NativeValue>;
    struct Frame {
        const RuleDef* rule = nullptr;
        std::map<std::string, Arg> fixed;
        std::vector<Expression> rest;
    };

    static Extent unite(Extent a, Extent b) {
        if (a.empty) return b;
        if (b.empty) return a;
        return {false, std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
    }

    // Natural placement: the node's own anchor at `origin`. Returns the
    // absolute extent of everything placed. `out` may be null for a dry run.
    Extent natural_expr(const Expression& e, Decimal origin, std::vector<AbsoluteBlock>* out) {
        const RuleDef* rule = reg_.find(e.name());
        Frame f;
        f.rule = rule;
        for (std::size_t i = 0; i < e.arity(); ++i) {
            const Expression& c = e.children()[i];
            if (i < rule->params.size())
                f.fixed.emplace(rule->params[i].name,
                                c.is_native() ? Arg{c.native_value()} : Arg{c});
            else
                f.rest.push_back(c);
        }
        return natural_template(rule->body, f, origin, out);
    }

    // Places `e` so that its extent starts exactly at `at`.
    Extent place_expr(const Expression& e, Decimal at, std::vector<AbsoluteBlock>* out) {
        Extent dry = natural_expr(e, Decimal{}, nullptr);
        if (dry.empty) return dry;
        return natural_expr(e, at - dry.lo, out);
    }

    Decimal measure_expr(const Expression& e) { return natural_expr(e, Decimal{}, nullptr).length(); }

    std::vector<Expression> score_args(const Frame& f, const std::string& name) {
        if (f.rule->variadic && f.rule->variadic->name == name) return f.rest;
        return {std::get<Expression>(f.fixed.at(name))};
    }

    Decimal eval_duration(const DurationExpr& d, const Frame& f) {
        switch (d.kind) {
            case DurationExpr::Kind::literal: return d.value;
            case DurationExpr::Kind::param: return std::get<Number>(std::get<NativeValue>(f.fixed.at(d.param))).value;
            case DurationExpr::Kind::dur_of: {
                Decimal total;
                for (const auto& x : score_args(f, d.param)) total += measure_expr(x);
                return total;
            }
            case DurationExpr::Kind::add: return eval_duration(d.operands[0], f) + eval_duration(d.operands[1], f);
            case DurationExpr::Kind::sub: return eval_duration(d.operands[0], f) - eval_duration(d.operands[1], f);
        }
        return {};
    }

    std::string label(const std::string& text, const Frame& f) {
        std::string out;
        std::size_t i = 0;
        while (i < text.size()) {
            if (text[i] != '{') {
                out += text[i++];
                continue;
            }
            std::size_t close = text.find('}', i);
            const auto& v = std::get<NativeValue>(f.fixed.at(text.substr(i + 1, close - i - 1)));
            if (auto* p = std::get_if<Point>(&v)) out += p->name;
            else if (auto* n = std::get_if<Number>(&v)) out += n->value.to_string();
            else out += std::get<Side>(v) == Side::left ? "left" : "right";
            i = close + 1;
        }
        return out;
    }

    // A template item's natural placement, anchored at `origin`.
    Extent natural_template(const ScoreTemplate& st, const Frame& f, Decimal origin,
                            std::vector<AbsoluteBlock>* out) {
        switch (st.kind) {
            case ScoreTemplate::Kind::block: {
                Decimal d = eval_duration(st.duration, f);
                if (!d.is_positive()) failed_ = true;
                if (out) {
                    std::vector<Track> seen;
                    for (Track t : st.tracks) {
                        if (std::find(seen.begin(), seen.end(), t) != seen.end()) continue;
                        seen.push_back(t);
                        out->push_back({t, origin, origin + d, label(st.label, f)});
                    }
                }
                return {false, origin, origin + d};
            }
            case ScoreTemplate::Kind::hold: {
                Decimal d = eval_duration(st.duration, f);
                if (d.is_negative()) failed_ = true;
                if (d.is_zero()) return {};
                return {false, origin, origin + d};
            }
            case ScoreTemplate::Kind::param:
            case ScoreTemplate::Kind::seq: {
                // Items laid end to end starting at origin.
                std::vector<std::pair<const ScoreTemplate*, const Expression*>> items;
                std::vector<Expression> holder;
                auto push_param = [&](const std::string& name) {
                    for (auto& x : score_args(f, name)) holder.push_back(x);
                };
                if (st.kind == ScoreTemplate::Kind::param) {
                    push_param(st.param);
                    for (const auto& x : holder) items.emplace_back(nullptr, &x);
                } else {
                    std::vector<std::pair<const ScoreTemplate*, std::size_t>> order;
                    holder.reserve(64);
                    for (const auto& item : st.items) {
                        if (item.kind == ScoreTemplate::Kind::param) {
                            std::size_t begin = holder.size();
                            push_param(item.param);
                            for (std::size_t k = begin; k < holder.size(); ++k) order.emplace_back(nullptr, k);
                        } else {
                            order.emplace_back(&item, 0);
                        }
                    }
                    for (auto [tpl, k] : order) items.emplace_back(tpl, tpl ? nullptr : &holder[k]);
                }
                Extent total;
                Decimal cursor = origin;
                for (auto [tpl, expr] : items) {
                    Extent e;
                    if (tpl) {
                        Extent dry = natural_template(*tpl, f, Decimal{}, nullptr);
                        if (dry.empty) continue;
                        e = natural_template(*tpl, f, cursor - dry.lo, out);
                    } else {
                        e = place_expr(*expr, cursor, out);
                        if (e.empty) continue;
                    }
                    cursor = e.hi;
                    total = unite(total, e);
                }
                return total;
            }
            case ScoreTemplate::Kind::sync: {
                // Base starts at origin; overlay starts offset later.
                Decimal offset = eval_duration(st.duration, f);
                Extent base_dry = natural_template(st.items[0], f, Decimal{}, nullptr);
                Extent over_dry = natural_template(st.items[1], f, Decimal{}, nullptr);
                Extent base, over;
                if (!base_dry.empty) base = natural_template(st.items[0], f, origin - base_dry.lo, out);
                if (!over_dry.empty) {
                    Decimal at = base_dry.empty ? origin : origin + offset;
                    over = natural_template(st.items[1], f, at - over_dry.lo, out);
                }
                return unite(base, over);
            }
        }
        return {};
    }

    const Registry& reg_;
    bool failed_ = false;
};

/// Flattens a score into the oracle's representation for comparison.
inline std::vector<AbsoluteBlock> flatten(const SigningScore& s) {
    std::vector<AbsoluteBlock> out;
    for (Track t : kAllTracks)
        for (const auto& b : s.blocks(t)) out.push_back({t, b.start, b.end, b.label});
    return out;
}

inline bool same_blocks(const std::vector<AbsoluteBlock>& a, const std::vector<AbsoluteBlock>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].track != b[i].track || a[i].start != b[i].start || a[i].end != b[i].end || a[i].label != b[i].label)
            return false;
    return true;
}

// ---------------------------------------------------------------------------
// Query oracle: enumerate every (piece, path), test each one with a separate
// matcher.

inline void all_paths(const Expression& e, std::vector<std::size_t>& prefix, std::vector<Path>& out) {
    out.emplace_back(prefix);
    for (std::size_t i = 0; i < e.children().size(); ++i) {
        prefix.push_back(i);
        all_paths(e.children()[i], prefix, out);
        prefix.pop_back();
    }
}

inline bool oracle_match(const Pattern& p, const Expression& e, std::map<std::string, std::string>& vars) {
    switch (p.kind) {
        case Pattern::Kind::wildcard: return true;
        case Pattern::Kind::variable: {
            std::string text = print_canonical(e);
            auto it = vars.find(p.name);
            if (it == vars.end()) {
                vars[p.name] = text;
                return true;
            }
            return it->second == text;
        }
        case Pattern::Kind::native: return e.is_native() && print_native(e.native_value()) == print_native(*p.native);
        case Pattern::Kind::rule: {
            if (e.is_native() || e.name() != p.name || e.children().size() != p.children.size()) return false;
            for (std::size_t i = 0; i < p.children.size(); ++i)
                if (!oracle_match(p.children[i], e.children()[i], vars)) return false;
            return true;
        }
    }
    return false;
}

struct OracleMatch {
    std::size_t piece;
    Path path;
    std::map<std::string, std::string> bindings;
};

inline std::vector<OracleMatch> oracle_query(const std::vector<Expression>& pieces, const Pattern& p) {
    std::vector<OracleMatch> out;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        std::vector<Path> paths;
        std::vector<std::size_t> prefix;
        all_paths(pieces[i], prefix, paths);
        std::sort(paths.begin(), paths.end(),
                  [](const Path& a, const Path& b) { return a.indices < b.indices; });
        for (const auto& path : paths) {
            const Expression* node = &pieces[i];
            for (std::size_t k : path.indices) node = &node->children()[k];
            std::map<std::string, std::string> vars;
            if (oracle_match(p, *node, vars)) out.push_back({i, path, vars});
        }
    }
    return out;
}

/// Random patterns built by abstracting random subtrees of an expression:
/// nodes turn into `_` or `?v` with some probability.
inline Pattern random_pattern_from(const Expression& e, std::mt19937_64& rng, int depth = 0) {
    std::uniform_int_distribution<int> d(0, 99);
    const int r = d(rng);
    if (depth > 0 && r < 15) return Pattern::wildcard();
    if (depth > 0 && r < 30) return Pattern::variable(r % 2 ? "x" : "y");
    if (e.is_native()) return Pattern{Pattern::Kind::native, {}, {}, e.native_value()};
    Pattern p{Pattern::Kind::rule, e.name(), {}, {}};
    for (const auto& c : e.children()) p.children.push_back(random_pattern_from(c, rng, depth + 1));
    return p;
}

}  // namespace azvd::testing
