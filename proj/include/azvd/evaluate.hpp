#pragma once

#include <azvd/registry.hpp>
#include <azvd/score.hpp>

#include <map>
#include <string>
#include <variant>
#include <vector>

namespace azvd {

/// A native where a score is needed, or a rule the registry cannot evaluate.
class EvaluationError : public ScoreError {
public:
    EvaluationError(const std::string& what, Path at) : ScoreError(what) { set_path(std::move(at)); }
};

namespace detail {

class Evaluator {
public:
    explicit Evaluator(const Registry& reg) : reg_(reg) {}

    SigningScore eval(const Expression& expr, const Path& at) {
        if (expr.is_native()) throw EvaluationError("native value where a score is expected", at);
        const RuleDef* rule = reg_.find(expr.name());
        if (!rule) throw EvaluationError("unknown rule '" + expr.name() + "'", at);

        Frame frame;
        for (std::size_t i = 0; i < expr.arity(); ++i) {
            const Expression& child = expr.children()[i];
            const bool is_score = rule->slot_type(i) == ParamType::score;
            Arg arg = is_score ? Arg{eval(child, at.child(i))} : Arg{child.native_value()};
            if (i < rule->params.size())
                frame.fixed.emplace(rule->params[i].name, std::move(arg));
            else
                frame.rest.push_back(std::move(arg));
        }
        if (rule->variadic) frame.rest_name = rule->variadic->name;

        try {
            return instantiate(rule->body, frame);
        } catch (ScoreError& e) {
            if (!e.path()) e.set_path(at);
            throw;
        }
    }

private:
    using Arg = std::variant<SigningScore, NativeValue>;

    struct Frame {
        std::map<std::string, Arg> fixed;
        std::string rest_name;
        std::vector<Arg> rest;
    };

    static SigningScore bound_score(const Frame& f, const std::string& name) {
        if (name == f.rest_name) {
            SigningScore out;
            for (const auto& a : f.rest) out = seq(out, std::get<SigningScore>(a));
            return out;
        }
        return std::get<SigningScore>(f.fixed.at(name));
    }

    static const NativeValue& bound_native(const Frame& f, const std::string& name) {
        return std::get<NativeValue>(f.fixed.at(name));
    }

    static Decimal duration(const DurationExpr& d, const Frame& f) {
        switch (d.kind) {
            case DurationExpr::Kind::literal: return d.value;
            case DurationExpr::Kind::dur_of: return bound_score(f, d.param).duration();
            case DurationExpr::Kind::param: return std::get<Number>(bound_native(f, d.param)).value;
            case DurationExpr::Kind::add: return duration(d.operands[0], f) + duration(d.operands[1], f);
            case DurationExpr::Kind::sub: return duration(d.operands[0], f) - duration(d.operands[1], f);
        }
        return {};
    }

    static std::string splice(const std::string& label, const Frame& f) {
        std::string out;
        const auto parts = split_label(label);
        for (const auto& [is_ref, text] : *parts) {
            if (!is_ref) {
                out += text;
                continue;
            }
            const NativeValue& v = bound_native(f, text);
            if (auto* p = std::get_if<Point>(&v))
                out += p->name;
            else if (auto* n = std::get_if<Number>(&v))
                out += n->value.to_string();
            else
                out += to_string(std::get<Side>(v));
        }
        return out;
    }

    SigningScore instantiate(const ScoreTemplate& st, const Frame& f) {
        switch (st.kind) {
            case ScoreTemplate::Kind::param: return bound_score(f, st.param);
            case ScoreTemplate::Kind::block:
                return SigningScore::block(st.tracks, splice(st.label, f), duration(st.duration, f));
            case ScoreTemplate::Kind::hold: return SigningScore::pause(duration(st.duration, f));
            case ScoreTemplate::Kind::seq: {
                SigningScore out;
                for (const auto& item : st.items) out = seq(out, instantiate(item, f));
                return out;
            }
            case ScoreTemplate::Kind::sync:
                return sync(instantiate(st.items[0], f), instantiate(st.items[1], f), duration(st.duration, f));
        }
        return {};
    }

    const Registry& reg_;
};

}  // namespace detail

/// Bottom-up evaluation of a well-typed expression into a signing score whose
/// earliest block starts at 0.
///
/// Type errors surface as TypeError; timeline failures as ScoreError
/// subclasses (TrackCollision, NonPositiveDuration) carrying the path of the
/// rule node whose body raised them.
inline SigningScore evaluate(const Registry& reg, const Expression& expr) {
    if (type_check(reg, expr) != ParamType::score)
        throw EvaluationError("expression is a native value, not a score", {});
    return detail::Evaluator(reg).eval(expr, {}).normalized();
}

}  // namespace azvd
