#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace reflectforge {

/// Exact rational over int64 with 128-bit intermediates. Always stored
/// reduced with a positive denominator; arithmetic throws std::overflow_error
/// if a reduced result does not fit, which keeps comparisons and report
/// arithmetic exact rather than silently lossy.
class Rational {
public:
    constexpr Rational() = default;
    constexpr Rational(long long value) : num_(value) {}  // NOLINT: implicit by design
    Rational(long long num, long long den);

    long long num() const { return num_; }
    long long den() const { return den_; }

    Rational operator+(const Rational& o) const;
    Rational operator-(const Rational& o) const;
    Rational operator*(const Rational& o) const;
    Rational operator/(const Rational& o) const;
    Rational operator-() const;

    bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
    bool operator!=(const Rational& o) const { return !(*this == o); }
    bool operator<(const Rational& o) const;
    bool operator<=(const Rational& o) const { return *this < o || *this == o; }
    bool operator>(const Rational& o) const { return o < *this; }
    bool operator>=(const Rational& o) const { return o <= *this; }

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    /// "3/5" for proper fractions, bare integer otherwise.
    std::string str() const;

    /// Accepts integers, finite decimals, and a/b fractions (optional spaces
    /// around the slash). Anything else, including values that would not fit,
    /// yields nullopt.
    static std::optional<Rational> parse(std::string_view text);

    static Rational from_i128(__int128 num, __int128 den);

private:
    long long num_ = 0;
    long long den_ = 1;
};

}  // namespace reflectforge
