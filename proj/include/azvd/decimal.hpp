#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace azvd {

/// Exact fixed-point decimal with nine fractional digits.
///
/// Numbers in expressions and every time value in a signing score use this
/// type, so that printing is lossless and score arithmetic is reproducible
/// bit for bit. Only addition, subtraction, negation and comparison are
/// needed by the timeline algebra.
class Decimal {
public:
    static constexpr int kFractionDigits = 9;
    static constexpr std::int64_t kScale = 1'000'000'000;

    constexpr Decimal() = default;

    static constexpr Decimal from_units(std::int64_t units) {
        Decimal d;
        d.units_ = units;
        return d;
    }

    static constexpr Decimal from_int(std::int64_t whole) {
        if (whole > std::numeric_limits<std::int64_t>::max() / kScale ||
            whole < std::numeric_limits<std::int64_t>::min() / kScale)
            throw std::overflow_error("decimal out of range");
        return from_units(whole * kScale);
    }

    /// Parses `["-"] digits ["." digits]`. Returns nullopt on bad syntax,
    /// more than nine significant fractional digits, or overflow.
    static std::optional<Decimal> parse(std::string_view text) {
        std::size_t i = 0;
        bool negative = false;
        if (i < text.size() && text[i] == '-') {
            negative = true;
            ++i;
        }
        const std::size_t int_begin = i;
        while (i < text.size() && is_digit(text[i])) ++i;
        if (i == int_begin) return std::nullopt;
        std::string_view int_part = text.substr(int_begin, i - int_begin);
        std::string_view frac_part;
        if (i < text.size() && text[i] == '.') {
            ++i;
            const std::size_t frac_begin = i;
            while (i < text.size() && is_digit(text[i])) ++i;
            if (i == frac_begin) return std::nullopt;
            frac_part = text.substr(frac_begin, i - frac_begin);
        }
        if (i != text.size()) return std::nullopt;

        while (!frac_part.empty() && frac_part.back() == '0') frac_part.remove_suffix(1);
        if (frac_part.size() > kFractionDigits) return std::nullopt;

        constexpr std::int64_t kMaxWhole = std::numeric_limits<std::int64_t>::max() / kScale;
        std::int64_t whole = 0;
        for (char c : int_part) {
            whole = whole * 10 + (c - '0');
            if (whole > kMaxWhole) return std::nullopt;
        }
        std::int64_t frac = 0;
        for (std::size_t k = 0; k < kFractionDigits; ++k)
            frac = frac * 10 + (k < frac_part.size() ? frac_part[k] - '0' : 0);

        std::int64_t units = whole * kScale + frac;
        return from_units(negative ? -units : units);
    }

    constexpr std::int64_t units() const { return units_; }
    constexpr bool is_zero() const { return units_ == 0; }
    constexpr bool is_negative() const { return units_ < 0; }
    constexpr bool is_positive() const { return units_ > 0; }

    /// Shortest exact form: "1", "2.3", "-0.15", "0".
    std::string to_string() const {
        std::uint64_t magnitude = units_ < 0 ? 0 - static_cast<std::uint64_t>(units_)
                                             : static_cast<std::uint64_t>(units_);
        std::string out = units_ < 0 ? "-" : "";
        out += std::to_string(magnitude / kScale);
        std::uint64_t frac = magnitude % kScale;
        if (frac != 0) {
            std::string digits = std::to_string(frac);
            digits.insert(0, kFractionDigits - digits.size(), '0');
            while (digits.back() == '0') digits.pop_back();
            out += '.';
            out += digits;
        }
        return out;
    }

    double to_double() const { return static_cast<double>(units_) / static_cast<double>(kScale); }

    friend constexpr auto operator<=>(Decimal, Decimal) = default;

    friend Decimal operator+(Decimal a, Decimal b) {
        std::int64_t r;
        if (__builtin_add_overflow(a.units_, b.units_, &r)) throw std::overflow_error("decimal overflow");
        return from_units(r);
    }
    friend Decimal operator-(Decimal a, Decimal b) {
        std::int64_t r;
        if (__builtin_sub_overflow(a.units_, b.units_, &r)) throw std::overflow_error("decimal overflow");
        return from_units(r);
    }
    friend Decimal operator-(Decimal a) { return Decimal{} - a; }
    Decimal& operator+=(Decimal b) { return *this = *this + b; }
    Decimal& operator-=(Decimal b) { return *this = *this - b; }

private:
    static constexpr bool is_digit(char c) { return c >= '0' && c <= '9'; }

    std::int64_t units_ = 0;
};

/// Convenience for literals in code and tests; throws on malformed text.
inline Decimal dec(std::string_view text) {
    auto d = Decimal::parse(text);
    if (!d) throw std::invalid_argument("bad decimal literal: " + std::string(text));
    return *d;
}

}  // namespace azvd
