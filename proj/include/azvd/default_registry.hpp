#pragma once

#include <azvd/registry.hpp>

#include <string_view>

namespace azvd {

/// Registry shipped with the library and embedded in the CLI.
///
/// Timing constants (1 s lexical blocks, 0.2 s blink, 0.15 s pout lead and
/// tail) are tunable data rather than engine constants.
inline constexpr std::string_view kDefaultRegistryText = R"azr(# Default AZee production rules.

# Signing-space and body locations.
point Lssp
point Rssp
point abdomen-hi
point abdomen-lo

# Lexical rules.
rule dog() = block({rhand,lhand}, "lsf:dog", 1.0) glyph atom "U+1F415"
rule nice-kind() = block({rhand,lhand}, "lsf:nice-kind", 1.0) glyph atom "U+1F493"
rule scar-between(p1: point, p2: point) = block({rhand}, "scar:{p1}->{p2}", 1.2) glyph nameframe

# Structural rules.
rule non-subjectivity(x: score) = sync(x, block({mouth}, "lip-pout", dur(x) + 0.3), -0.15) glyph overmark "U+2713"
rule info-about(a: score, b: score) = sync(seq(a, b), block({eyes}, "el:cl", 0.2), dur(a) - 0.1) glyph infix "U+003D"
rule context(c: score, f: score) = seq(c, f) glyph contextbar
rule each-of(items: score... min 2) = seq(items) glyph bulletlist "U+2022"
rule localised-discourse(p: point, d: score) = sync(d, block({torso}, "orient:{p}", dur(d)), 0.0) glyph nameframe

# Lexicon for the bundled story sample (La bise et le soleil).
rule bise() = block({rhand,lhand}, "lsf:bise", 1.0) glyph atom "U+1F32C"
rule sun() = block({rhand,lhand}, "lsf:sun", 1.0) glyph atom "U+2600"
rule traveller() = block({rhand,lhand}, "lsf:traveller", 1.0) glyph atom "U+1F6B6"
rule coat() = block({rhand,lhand}, "lsf:coat", 1.0) glyph atom "U+1F9E5"
rule strong() = block({rhand,lhand}, "lsf:strong", 1.0) glyph atom "U+1F4AA"
rule argue() = block({rhand,lhand}, "lsf:argue", 1.0) glyph atom "U+1F5EF"
rule blow() = block({rhand,lhand}, "lsf:blow", 1.0) glyph atom "U+1F4A8"
rule shine() = block({rhand,lhand}, "lsf:shine", 1.0) glyph atom "U+1F506"
rule warm() = block({rhand,lhand}, "lsf:warm", 1.0) glyph atom "U+1F321"
rule cold() = block({rhand,lhand}, "lsf:cold", 1.0) glyph atom "U+1F976"
rule wrap-up() = block({rhand,lhand}, "lsf:wrap-up", 1.0) glyph atom "U+1F9E3"
rule take-off() = block({rhand,lhand}, "lsf:take-off", 1.0) glyph atom "U+1F45A"
rule give-up() = block({rhand,lhand}, "lsf:give-up", 1.0) glyph atom "U+1F3F3"
rule win() = block({rhand,lhand}, "lsf:win", 1.0) glyph atom "U+1F3C6"
rule agree() = block({rhand,lhand}, "lsf:agree", 1.0) glyph atom "U+1F91D"
rule first() = block({rhand,lhand}, "lsf:first", 1.0) glyph atom "U+1F947"
rule more() = block({rhand,lhand}, "lsf:more", 1.0) glyph atom "U+2795"
rule road() = block({rhand,lhand}, "lsf:road", 1.0) glyph atom "U+1F6E3"
rule who() = block({rhand,lhand}, "lsf:who", 1.0) glyph atom "U+2753"

# Left/right opposition of two discourses.
template opposition = each-of(localised-discourse(@Lssp, ?a), localised-discourse(@Rssp, ?b)) glyph sidebyside "U+2194"
)azr";

inline const Registry& default_registry() {
    static const Registry reg = load_registry(kDefaultRegistryText);
    return reg;
}

}  // namespace azvd
