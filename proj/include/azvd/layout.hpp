#pragma once

#include <azvd/registry.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

namespace azvd {

// ---------------------------------------------------------------------------
// Layout tree

/// A node swallowed by a template match. It is drawn as an invisible region
/// covering the slots found beneath it in the pattern.
struct ConsumedNode {
    Path path;
    std::vector<std::size_t> slots;  // empty: the whole compound box

    friend bool operator==(const ConsumedNode&, const ConsumedNode&) = default;
};

struct LayoutNode {
    enum class Kind { atom, infix, overmark, contextbar, bulletlist, sidebyside, nameframe, native };

    Kind kind = Kind::native;
    std::u32string glyphs;  // atom codepoints, separator, mark or bullet
    std::string text;       // rule name (nameframe) or literal (native)
    std::vector<LayoutNode> children;
    Path source;
    std::string template_name;        // sidebyside
    std::vector<ConsumedNode> consumed;  // sidebyside

    friend bool operator==(const LayoutNode&, const LayoutNode&) = default;
};

namespace detail {

/// Walks a template pattern alongside the matched expression, recording
/// where each slot variable first binds and which expression nodes the
/// match consumes.
class TemplateBinder {
public:
    TemplateBinder(const Template& t, const Expression& root, const Path& root_path)
        : slots_(t.slots()), slot_paths_(slots_.size()), slot_exprs_(slots_.size()), seen_(slots_.size(), false) {
        std::vector<std::size_t> all(slots_.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        for (std::size_t i = 0; i < t.pattern.children.size(); ++i)
            walk(t.pattern.children[i], root.children()[i], root_path.child(i), all);
    }

    const std::vector<Path>& slot_paths() const { return slot_paths_; }
    const std::vector<std::optional<Expression>>& slot_exprs() const { return slot_exprs_; }
    std::vector<ConsumedNode> consumed() { return std::move(consumed_); }

private:
    std::size_t slot_of(const std::string& var) const {
        return static_cast<std::size_t>(std::find(slots_.begin(), slots_.end(), var) - slots_.begin());
    }

    void collect_vars(const Pattern& p, std::vector<std::size_t>& out) const {
        if (p.kind == Pattern::Kind::variable) {
            std::size_t s = slot_of(p.name);
            if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
        }
        for (const auto& c : p.children) collect_vars(c, out);
    }

    void consume_subtree(const Expression& e, const Path& at, const std::vector<std::size_t>& region) {
        consumed_.push_back({at, region});
        for (std::size_t i = 0; i < e.arity(); ++i) consume_subtree(e.children()[i], at.child(i), region);
    }

    void walk(const Pattern& p, const Expression& e, const Path& at, const std::vector<std::size_t>& inherited) {
        std::vector<std::size_t> region;
        collect_vars(p, region);
        std::sort(region.begin(), region.end());
        if (region.empty()) region = inherited;

        if (p.kind == Pattern::Kind::variable) {
            std::size_t s = slot_of(p.name);
            if (!seen_[s]) {
                seen_[s] = true;
                slot_paths_[s] = at;
                slot_exprs_[s] = e;
                return;
            }
            consume_subtree(e, at, region);
            return;
        }
        if (p.kind == Pattern::Kind::wildcard) {
            consume_subtree(e, at, region);
            return;
        }
        consumed_.push_back({at, region});
        for (std::size_t i = 0; i < p.children.size(); ++i)
            walk(p.children[i], e.children()[i], at.child(i), region);
    }

    std::vector<std::string> slots_;
    std::vector<Path> slot_paths_;
    std::vector<std::optional<Expression>> slot_exprs_;
    std::vector<bool> seen_;
    std::vector<ConsumedNode> consumed_;
};

inline LayoutNode rewrite(const Registry& reg, const Expression& expr, const Path& at) {
    LayoutNode node;
    node.source = at;
    if (expr.is_native()) {
        node.kind = LayoutNode::Kind::native;
        node.text = print_native(expr.native_value());
        return node;
    }
    for (const auto& t : reg.templates()) {
        if (!match(t.pattern, expr)) continue;
        TemplateBinder binder(t, expr, at);
        node.kind = LayoutNode::Kind::sidebyside;
        node.glyphs = t.separator;
        node.template_name = t.name;
        for (std::size_t s = 0; s < binder.slot_paths().size(); ++s)
            node.children.push_back(rewrite(reg, *binder.slot_exprs()[s], binder.slot_paths()[s]));
        node.consumed = binder.consumed();
        return node;
    }

    const RuleDef* rule = reg.find(expr.name());
    GlyphSpec glyph = rule ? rule->glyph : GlyphSpec{};
    using K = GlyphSpec::Kind;
    switch (glyph.kind) {
        case K::atom: node.kind = LayoutNode::Kind::atom; break;
        case K::infix: node.kind = LayoutNode::Kind::infix; break;
        case K::overmark: node.kind = LayoutNode::Kind::overmark; break;
        case K::contextbar: node.kind = LayoutNode::Kind::contextbar; break;
        case K::bulletlist: node.kind = LayoutNode::Kind::bulletlist; break;
        case K::nameframe: node.kind = LayoutNode::Kind::nameframe; break;
    }
    node.glyphs = glyph.codepoints;
    if (node.kind == LayoutNode::Kind::nameframe) node.text = expr.name();
    for (std::size_t i = 0; i < expr.arity(); ++i) node.children.push_back(rewrite(reg, expr.children()[i], at.child(i)));
    return node;
}

}  // namespace detail

/// Top-down template rewriting followed by each rule's own glyph. Templates
/// are tried in registry order; the first match wins and its consumed nodes
/// are not scanned again. Rules without a usable glyph fall back to a name frame.
inline LayoutNode apply_templates(const Registry& reg, const Expression& expr) {
    return detail::rewrite(reg, expr, {});
}

// ---------------------------------------------------------------------------
// Scene graph

struct SceneElement {
    enum class Kind { glyph_run, line, rect };

    Kind kind = Kind::rect;
    // glyph_run and rect: top-left corner and size. line: (x, y) to (x + w, y + h).
    double x = 0, y = 0, w = 0, h = 0;
    std::u32string codepoints;  // glyph_run
    bool frame = false;         // rect: drawn frame rather than an invisible hit region
    Path source;
    std::size_t piece = 0;

    double x2() const { return x + w; }
    double y2() const { return y + h; }

    friend bool operator==(const SceneElement&, const SceneElement&) = default;
};

/// Positioned elements in painter's order. Units are em.
struct SceneGraph {
    double width = 0;
    double height = 0;
    std::vector<SceneElement> elements;
    bool multi_piece = false;

    friend bool operator==(const SceneGraph&, const SceneGraph&) = default;
};

namespace metrics {
inline constexpr double kGap = 0.25;          // infix / side-by-side / bullet gaps
inline constexpr double kMarkHeight = 0.5;
inline constexpr double kMarkGap = 0.1;
inline constexpr double kBarGap = 0.15;
inline constexpr double kRowGap = 0.2;
inline constexpr double kFramePad = 0.2;
inline constexpr double kTextAdvance = 0.6;   // per character of names and literals
inline constexpr double kPieceGap = 0.5;
inline constexpr double kEmUnits = 16.0;
}  // namespace metrics

namespace detail {

struct Fragment {
    double w = 0, h = 0;
    std::vector<SceneElement> elements;
};

inline void place(std::vector<SceneElement>& out, const Fragment& f, double dx, double dy) {
    for (SceneElement e : f.elements) {
        e.x += dx;
        e.y += dy;
        out.push_back(std::move(e));
    }
}

inline SceneElement glyph_run(double x, double y, double w, double h, std::u32string cps, const Path& src) {
    SceneElement e;
    e.kind = SceneElement::Kind::glyph_run;
    e.x = x;
    e.y = y;
    e.w = w;
    e.h = h;
    e.codepoints = std::move(cps);
    e.source = src;
    return e;
}

inline SceneElement rect(double x, double y, double w, double h, bool frame, const Path& src) {
    SceneElement e;
    e.kind = SceneElement::Kind::rect;
    e.x = x;
    e.y = y;
    e.w = w;
    e.h = h;
    e.frame = frame;
    e.source = src;
    return e;
}

inline std::u32string ascii_codepoints(const std::string& s) { return {s.begin(), s.end()}; }

inline Fragment layout_node(const LayoutNode& node) {
    using namespace metrics;
    using K = LayoutNode::Kind;
    Fragment f;
    auto& out = f.elements;
    switch (node.kind) {
        case K::atom: {
            f.w = static_cast<double>(node.glyphs.size());
            f.h = 1;
            out.push_back(glyph_run(0, 0, f.w, 1, node.glyphs, node.source));
            break;
        }
        case K::native: {
            f.w = kTextAdvance * static_cast<double>(node.text.size());
            f.h = 1;
            out.push_back(glyph_run(0, 0, f.w, 1, ascii_codepoints(node.text), node.source));
            break;
        }
        case K::infix:
        case K::sidebyside: {
            Fragment left = layout_node(node.children[0]);
            Fragment right = layout_node(node.children[1]);
            const double sep = static_cast<double>(node.glyphs.size());
            f.w = left.w + kGap + sep + kGap + right.w;
            f.h = std::max({left.h, 1.0, right.h});
            const double left_y = (f.h - left.h) / 2;
            const double right_x = left.w + 2 * kGap + sep;
            const double right_y = (f.h - right.h) / 2;
            out.push_back(rect(0, 0, f.w, f.h, false, node.source));
            for (const auto& c : node.consumed) {
                double x0 = 0, y0 = 0, x1 = f.w, y1 = f.h;
                if (!c.slots.empty()) {
                    x0 = y0 = 1e300;
                    x1 = y1 = -1e300;
                    for (std::size_t s : c.slots) {
                        double bx = s == 0 ? 0 : right_x, by = s == 0 ? left_y : right_y;
                        const Fragment& b = s == 0 ? left : right;
                        x0 = std::min(x0, bx);
                        y0 = std::min(y0, by);
                        x1 = std::max(x1, bx + b.w);
                        y1 = std::max(y1, by + b.h);
                    }
                }
                out.push_back(rect(x0, y0, x1 - x0, y1 - y0, false, c.path));
            }
            out.push_back(glyph_run(left.w + kGap, (f.h - 1) / 2, sep, 1, node.glyphs, node.source));
            place(out, left, 0, left_y);
            place(out, right, right_x, right_y);
            break;
        }
        case K::overmark: {
            Fragment child = layout_node(node.children[0]);
            const double mark_w = kMarkHeight * static_cast<double>(node.glyphs.size());
            f.w = std::max(mark_w, child.w);
            f.h = kMarkHeight + kMarkGap + child.h;
            out.push_back(rect(0, 0, f.w, f.h, false, node.source));
            out.push_back(glyph_run((f.w - mark_w) / 2, 0, mark_w, kMarkHeight, node.glyphs, node.source));
            place(out, child, (f.w - child.w) / 2, kMarkHeight + kMarkGap);
            break;
        }
        case K::contextbar: {
            Fragment top = layout_node(node.children[0]);
            Fragment bottom = layout_node(node.children[1]);
            f.w = std::max(top.w, bottom.w);
            f.h = top.h + 2 * kBarGap + bottom.h;
            out.push_back(rect(0, 0, f.w, f.h, false, node.source));
            SceneElement bar;
            bar.kind = SceneElement::Kind::line;
            bar.x = 0;
            bar.y = top.h + kBarGap;
            bar.w = f.w;
            bar.h = 0;
            bar.source = node.source;
            out.push_back(bar);
            place(out, top, (f.w - top.w) / 2, 0);
            place(out, bottom, (f.w - bottom.w) / 2, top.h + 2 * kBarGap);
            break;
        }
        case K::bulletlist: {
            const double bullet_w = static_cast<double>(node.glyphs.size());
            std::vector<Fragment> items;
            for (const auto& c : node.children) items.push_back(layout_node(c));
            for (const auto& it : items) f.w = std::max(f.w, bullet_w + kGap + it.w);
            for (std::size_t i = 0; i < items.size(); ++i)
                f.h += std::max(1.0, items[i].h) + (i ? kRowGap : 0.0);
            out.push_back(rect(0, 0, f.w, f.h, false, node.source));
            double y = 0;
            for (const auto& it : items) {
                const double row_h = std::max(1.0, it.h);
                out.push_back(glyph_run(0, y + (row_h - 1) / 2, bullet_w, 1, node.glyphs, node.source));
                place(out, it, bullet_w + kGap, y + (row_h - it.h) / 2);
                y += row_h + kRowGap;
            }
            break;
        }
        case K::nameframe: {
            const double name_w = kTextAdvance * static_cast<double>(node.text.size());
            std::vector<Fragment> kids;
            double row_w = 0, row_h = 0;
            for (const auto& c : node.children) {
                kids.push_back(layout_node(c));
                row_w += kids.back().w + (kids.size() > 1 ? kGap : 0.0);
                row_h = std::max(row_h, kids.back().h);
            }
            f.w = std::max(name_w, row_w) + 2 * kFramePad;
            f.h = 1 + row_h + 2 * kFramePad;
            out.push_back(rect(0, 0, f.w, f.h, true, node.source));
            out.push_back(glyph_run(kFramePad, kFramePad, name_w, 1, ascii_codepoints(node.text), node.source));
            double x = kFramePad;
            for (const auto& k : kids) {
                place(out, k, x, kFramePad + 1 + (row_h - k.h) / 2);
                x += k.w + kGap;
            }
            break;
        }
    }
    return f;
}

}  // namespace detail

inline SceneGraph layout(const LayoutNode& root) {
    detail::Fragment f = detail::layout_node(root);
    return SceneGraph{f.w, f.h, std::move(f.elements), false};
}

/// Recursive box layout of one expression.
inline SceneGraph layout(const Registry& reg, const Expression& expr) { return layout(apply_templates(reg, expr)); }

/// Pieces stacked top to bottom, left aligned.
inline SceneGraph layout_document(const Registry& reg, std::span<const Expression> pieces) {
    SceneGraph scene;
    scene.multi_piece = true;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        SceneGraph one = layout(reg, pieces[i]);
        const double y = scene.height + (i ? metrics::kPieceGap : 0.0);
        for (SceneElement e : one.elements) {
            e.y += y;
            e.piece = i;
            scene.elements.push_back(std::move(e));
        }
        scene.width = std::max(scene.width, one.width);
        scene.height = y + one.height;
    }
    return scene;
}

/// Index of the deepest element containing (x, y) in em; ties go to the
/// element painted last.
inline std::optional<std::size_t> hit_test_element(const SceneGraph& scene, double x, double y) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < scene.elements.size(); ++i) {
        const auto& e = scene.elements[i];
        const double x0 = std::min(e.x, e.x2()), x1 = std::max(e.x, e.x2());
        const double y0 = std::min(e.y, e.y2()), y1 = std::max(e.y, e.y2());
        if (x < x0 || x > x1 || y < y0 || y > y1) continue;
        if (!best || e.source.size() >= scene.elements[*best].source.size()) best = i;
    }
    return best;
}

inline std::optional<Path> hit_test(const SceneGraph& scene, double x, double y) {
    if (auto i = hit_test_element(scene, x, y)) return scene.elements[*i].source;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// SVG export

namespace detail {

inline std::string svg_number(double em) {
    char buf[64];
    double v = std::round(em * metrics::kEmUnits * 100.0) / 100.0;
    if (v == 0) v = 0;  // no "-0"
    std::snprintf(buf, sizeof buf, "%.2f", v);
    std::string s = buf;
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
    return s;
}

inline void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

inline std::string xml_text(const std::u32string& cps) {
    std::string out;
    for (char32_t c : cps) {
        switch (c) {
            case U'&': out += "&amp;"; break;
            case U'<': out += "&lt;"; break;
            case U'>': out += "&gt;"; break;
            case U'"': out += "&quot;"; break;
            default: append_utf8(out, c);
        }
    }
    return out;
}

}  // namespace detail

inline std::string to_utf8(const std::u32string& cps) {
    std::string out;
    for (char32_t c : cps) detail::append_utf8(out, c);
    return out;
}

/// SVG 1.1, 16 user units per em. Every element carries its source path in
/// `data-source` (and `data-piece` for document scenes).
inline std::string to_svg(const SceneGraph& scene) {
    using detail::svg_number;
    const std::string w = svg_number(scene.width), h = svg_number(scene.height);
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + w + "\" height=\"" + h +
                      "\" viewBox=\"0 0 " + w + " " + h + "\" font-size=\"16\">";
    if (!scene.elements.empty()) out += "\n";
    for (const auto& e : scene.elements) {
        std::string attrs = " data-source=\"" + e.source.to_string() + "\"";
        if (scene.multi_piece) attrs += " data-piece=\"" + std::to_string(e.piece) + "\"";
        switch (e.kind) {
            case SceneElement::Kind::glyph_run:
                out += "<text x=\"" + svg_number(e.x) + "\" y=\"" + svg_number(e.y + 0.8 * e.h) + "\" font-size=\"" +
                       svg_number(e.h) + "\" textLength=\"" + svg_number(e.w) +
                       "\" lengthAdjust=\"spacingAndGlyphs\"" + attrs + ">" + detail::xml_text(e.codepoints) +
                       "</text>\n";
                break;
            case SceneElement::Kind::line:
                out += "<line x1=\"" + svg_number(e.x) + "\" y1=\"" + svg_number(e.y) + "\" x2=\"" +
                       svg_number(e.x2()) + "\" y2=\"" + svg_number(e.y2()) + "\" stroke=\"black\" stroke-width=\"1\"" +
                       attrs + "/>\n";
                break;
            case SceneElement::Kind::rect:
                out += "<rect x=\"" + svg_number(e.x) + "\" y=\"" + svg_number(e.y) + "\" width=\"" + svg_number(e.w) +
                       "\" height=\"" + svg_number(e.h) + "\"" +
                       (e.frame ? " fill=\"none\" stroke=\"black\" stroke-width=\"0.5\""
                                : " fill=\"none\" stroke=\"none\" pointer-events=\"all\"") +
                       attrs + "/>\n";
                break;
        }
    }
    out += "</svg>\n";
    return out;
}

}  // namespace azvd
