#include "reflectforge/rational.hpp"

#include "reflectforge/errors.hpp"

#include <cctype>
#include <limits>
#include <stdexcept>

namespace reflectforge {

namespace {

__int128 gcd_i128(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        __int128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

long long narrow(__int128 v) {
    if (v > std::numeric_limits<long long>::max() || v < std::numeric_limits<long long>::min()) {
        throw std::overflow_error("rational overflow");
    }
    return static_cast<long long>(v);
}

}  // namespace

Rational Rational::from_i128(__int128 num, __int128 den) {
    if (den == 0) {
        throw DomainError("rational with zero denominator");
    }
    if (den < 0) {
        num = -num;
        den = -den;
    }
    if (num == 0) {
        return Rational();
    }
    __int128 g = gcd_i128(num, den);
    Rational r;
    r.num_ = narrow(num / g);
    r.den_ = narrow(den / g);
    return r;
}

Rational::Rational(long long num, long long den) {
    *this = from_i128(num, den);
}

Rational Rational::operator+(const Rational& o) const {
    return from_i128(static_cast<__int128>(num_) * o.den_ + static_cast<__int128>(o.num_) * den_,
                     static_cast<__int128>(den_) * o.den_);
}

Rational Rational::operator-(const Rational& o) const {
    return *this + (-o);
}

Rational Rational::operator*(const Rational& o) const {
    return from_i128(static_cast<__int128>(num_) * o.num_, static_cast<__int128>(den_) * o.den_);
}

Rational Rational::operator/(const Rational& o) const {
    if (o.num_ == 0) {
        throw DomainError("rational division by zero");
    }
    return from_i128(static_cast<__int128>(num_) * o.den_, static_cast<__int128>(den_) * o.num_);
}

Rational Rational::operator-() const {
    Rational r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
}

bool Rational::operator<(const Rational& o) const {
    return static_cast<__int128>(num_) * o.den_ < static_cast<__int128>(o.num_) * den_;
}

std::string Rational::str() const {
    if (den_ == 1) {
        return std::to_string(num_);
    }
    return std::to_string(num_) + "/" + std::to_string(den_);
}

namespace {

struct Cursor {
    std::string_view s;
    size_t i = 0;
    bool done() const { return i >= s.size(); }
    char peek() const { return s[i]; }
    void skip_ws() {
        while (!done() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    }
};

// digits (with at most one optional dot) -> value scaled by 10^decimals.
// Returns false on malformed input or too many digits for the 128-bit guard.
bool read_number(Cursor& c, bool allow_dot, __int128& value, int& decimals) {
    value = 0;
    decimals = 0;
    bool any = false;
    bool seen_dot = false;
    int total_digits = 0;
    while (!c.done()) {
        char ch = c.peek();
        if (ch == '.' && allow_dot && !seen_dot) {
            seen_dot = true;
            ++c.i;
            continue;
        }
        if (!std::isdigit(static_cast<unsigned char>(ch))) break;
        if (++total_digits > 37) return false;
        value = value * 10 + (ch - '0');
        if (seen_dot) ++decimals;
        any = true;
        ++c.i;
    }
    if (decimals > 18) return false;  // 10^19 exceeds int64
    return any;
}

bool read_sign(Cursor& c) {
    bool neg = false;
    if (!c.done() && (c.peek() == '+' || c.peek() == '-')) {
        neg = c.peek() == '-';
        ++c.i;
    }
    return neg;
}

}  // namespace

std::optional<Rational> Rational::parse(std::string_view text) {
    Cursor c{text};
    c.skip_ws();
    bool neg = read_sign(c);
    __int128 num = 0;
    int num_dec = 0;
    if (!read_number(c, /*allow_dot=*/true, num, num_dec)) {
        return std::nullopt;
    }
    if (neg) num = -num;

    __int128 den = 1;
    for (int i = 0; i < num_dec; ++i) den *= 10;

    c.skip_ws();
    if (!c.done() && c.peek() == '/') {
        if (num_dec > 0) return std::nullopt;  // no decimal numerators in a/b form
        ++c.i;
        c.skip_ws();
        bool dneg = read_sign(c);
        __int128 d = 0;
        int d_dec = 0;
        if (!read_number(c, /*allow_dot=*/false, d, d_dec) || d == 0) {
            return std::nullopt;
        }
        den = dneg ? -d : d;
    }
    c.skip_ws();
    if (!c.done()) {
        return std::nullopt;
    }
    try {
        return from_i128(num, den);
    } catch (const std::overflow_error&) {
        return std::nullopt;
    }
}

}  // namespace reflectforge
