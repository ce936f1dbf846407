#pragma once

#include <cctype>
#include <cstdint>
#include <numeric>
#include <string>

#include "equicomp/errors.hpp"

namespace equicomp {

// Exact rational over int64 with checked arithmetic. Used for energy values,
// the grid quantum and derived means, so that grid placement is exact.
struct Rational {
    long long num = 0;
    long long den = 1; // > 0, gcd(|num|, den) == 1

    Rational() = default;

    Rational(long long n, long long d = 1) {
        if (d == 0) throw validation_error("rational with zero denominator");
        __int128 nn = n, dd = d;
        if (dd < 0) { nn = -nn; dd = -dd; }
        num = checked(nn);
        den = checked(dd);
        reduce();
    }

    static long long checked(__int128 v) {
        if (v > INT64_MAX || v < INT64_MIN)
            throw validation_error("rational overflow");
        return static_cast<long long>(v);
    }

    void reduce() {
        const long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
    }

    static Rational from_int128(__int128 n, __int128 d) {
        if (d == 0) throw validation_error("rational with zero denominator");
        if (d < 0) { n = -n; d = -d; }
        __int128 a = n < 0 ? -n : n, b = d;
        while (b != 0) { __int128 t = a % b; a = b; b = t; }
        if (a > 1) { n /= a; d /= a; }
        Rational r;
        r.num = checked(n);
        r.den = checked(d);
        return r;
    }

    bool is_integer() const { return den == 1; }
    bool is_zero() const { return num == 0; }
    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

    std::string str() const {
        if (den == 1) return std::to_string(num);
        return std::to_string(num) + "/" + std::to_string(den);
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return from_int128((__int128)a.num * b.den + (__int128)b.num * a.den,
                           (__int128)a.den * b.den);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return from_int128((__int128)a.num * b.den - (__int128)b.num * a.den,
                           (__int128)a.den * b.den);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return from_int128((__int128)a.num * b.num, (__int128)a.den * b.den);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num == 0) throw validation_error("rational division by zero");
        return from_int128((__int128)a.num * b.den, (__int128)a.den * b.num);
    }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num == b.num && a.den == b.den;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return (__int128)a.num * b.den < (__int128)b.num * a.den;
    }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }
};

inline Rational abs(const Rational& r) { return r.num < 0 ? Rational(-r.num, r.den) : r; }

// Nearest integer to a rational; ties round half away from zero.
inline long long round_to_integer(const Rational& r) {
    const long long q = r.num / r.den;
    const long long rem = r.num % r.den;
    if (rem == 0) return q;
    const long long twice = (rem < 0 ? -rem : rem) * 2;
    if (twice >= r.den) return r.num < 0 ? q - 1 : q + 1;
    return q;
}

namespace detail {

inline long long parse_ll(const std::string& s, const std::string& what) {
    if (s.empty()) throw validation_error("empty " + what);
    size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &pos);
    } catch (const std::exception&) {
        throw validation_error("cannot parse " + what + " '" + s + "'");
    }
    if (pos != s.size()) throw validation_error("trailing characters in " + what + " '" + s + "'");
    return v;
}

} // namespace detail

// Accepts "3", "-2", "3/2" and decimals like "1.25" (parsed exactly).
inline Rational parse_rational(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) throw validation_error("empty rational");

    if (auto slash = s.find('/'); slash != std::string::npos) {
        const long long p = detail::parse_ll(s.substr(0, slash), "numerator");
        const long long q = detail::parse_ll(s.substr(slash + 1), "denominator");
        if (q == 0) throw validation_error("zero denominator in '" + text + "'");
        return Rational(p, q);
    }
    if (auto dot = s.find('.'); dot != std::string::npos) {
        std::string ip = s.substr(0, dot), fp = s.substr(dot + 1);
        if (fp.empty()) return Rational(detail::parse_ll(ip, "number"));
        if (fp.size() > 18) throw validation_error("too many decimal digits in '" + text + "'");
        bool neg = !ip.empty() && ip[0] == '-';
        if (!ip.empty() && (ip[0] == '-' || ip[0] == '+')) ip = ip.substr(1);
        if (ip.empty()) ip = "0";
        __int128 scale = 1;
        for (size_t i = 0; i < fp.size(); ++i) scale *= 10;
        const long long whole = detail::parse_ll(ip, "integer part");
        const long long frac = detail::parse_ll(fp, "fractional part");
        if (frac < 0) throw validation_error("malformed decimal '" + text + "'");
        __int128 n = (__int128)whole * scale + frac;
        if (neg) n = -n;
        return Rational::from_int128(n, scale);
    }
    return Rational(detail::parse_ll(s, "number"));
}

} // namespace equicomp
