#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace latball {

// Exact reduced fraction on 64-bit components. Intermediates use __int128,
// which covers every product arising at the scales this project handles
// (numerators below 2^62); overflow beyond that throws instead of wrapping.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;  // always > 0

    Rational() = default;
    Rational(std::int64_t n) : num(n), den(1) {}
    Rational(std::int64_t n, std::int64_t d) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den == 0) throw std::invalid_argument("rational: zero denominator");
        if (den < 0) { num = -num; den = -den; }
        const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
    }

    static Rational parse(const std::string& s) {
        const auto slash = s.find('/');
        std::size_t pos = 0;
        Rational r;
        if (slash == std::string::npos) {
            r.num = std::stoll(s, &pos);
            if (pos != s.size()) throw std::invalid_argument("rational: trailing characters in '" + s + "'");
            r.den = 1;
        } else {
            r.num = std::stoll(s.substr(0, slash), &pos);
            if (pos != slash) throw std::invalid_argument("rational: bad numerator in '" + s + "'");
            r.den = std::stoll(s.substr(slash + 1), &pos);
            if (pos != s.size() - slash - 1) throw std::invalid_argument("rational: bad denominator in '" + s + "'");
        }
        r.normalize();
        return r;
    }

    std::string str() const {
        return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
    }

    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

    // floor(num/den) as an integer
    std::int64_t floor() const {
        std::int64_t q = num / den, r = num % den;
        return (r < 0) ? q - 1 : q;
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        __int128 n = (__int128)a.num * b.den + (__int128)b.num * a.den;
        __int128 d = (__int128)a.den * b.den;
        return from128(n, d);
    }
    friend Rational operator-(const Rational& a, const Rational& b) { return a + Rational(-b.num, b.den); }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return from128((__int128)a.num * b.num, (__int128)a.den * b.den);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num == 0) throw std::invalid_argument("rational: division by zero");
        return from128((__int128)a.num * b.den, (__int128)a.den * b.num);
    }
    friend bool operator==(const Rational& a, const Rational& b) { return a.num == b.num && a.den == b.den; }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return (__int128)a.num * b.den < (__int128)b.num * a.den;
    }
    friend bool operator<=(const Rational& a, const Rational& b) { return a == b || a < b; }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator>=(const Rational& a, const Rational& b) { return b <= a; }

  private:
    static Rational from128(__int128 n, __int128 d) {
        if (d < 0) { n = -n; d = -d; }
        __int128 a = n < 0 ? -n : n, b = d;
        while (b) { __int128 t = a % b; a = b; b = t; }
        if (a > 1) { n /= a; d /= a; }
        constexpr __int128 lim = (__int128)INT64_MAX;
        if (n > lim || n < -lim || d > lim) throw std::overflow_error("rational: component exceeds 64 bits");
        Rational r;
        r.num = (std::int64_t)n;
        r.den = (std::int64_t)d;
        return r;
    }
};

}  // namespace latball
