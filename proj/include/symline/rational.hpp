#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace symline {

using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

struct MathError : std::runtime_error {
    explicit MathError(const std::string& what) : std::runtime_error(what) {}
};

inline BigInt rat_num(const Rat& r) { return boost::multiprecision::numerator(r); }
inline BigInt rat_den(const Rat& r) { return boost::multiprecision::denominator(r); }

inline bool is_integer(const Rat& r) { return rat_den(r) == 1; }

inline BigInt big_gcd(BigInt a, BigInt b) { return boost::multiprecision::gcd(a, b); }
inline BigInt big_lcm(BigInt a, BigInt b) { return boost::multiprecision::lcm(a, b); }

inline Rat rat_gcd(const Rat& a, const Rat& b) {
    // gcd over Q: gcd of numerators over lcm of denominators; gcd(0,0)=0
    if (a == 0 && b == 0) return Rat(0);
    BigInt n = big_gcd(boost::multiprecision::abs(rat_num(a)), boost::multiprecision::abs(rat_num(b)));
    BigInt d = big_lcm(rat_den(a), rat_den(b));
    return Rat(n, d);
}

inline BigInt big_pow(BigInt b, unsigned long e) {
    BigInt r = 1;
    while (e) {
        if (e & 1) r *= b;
        b *= b;
        e >>= 1;
    }
    return r;
}

inline Rat rat_pow(const Rat& b, long e) {
    if (e == 0) return Rat(1);
    if (b == 0) {
        if (e < 0) throw MathError("0 raised to a negative power");
        return Rat(0);
    }
    unsigned long a = static_cast<unsigned long>(e < 0 ? -e : e);
    Rat r(big_pow(rat_num(b), a), big_pow(rat_den(b), a));
    return e < 0 ? Rat(1) / r : r;
}

// Exact integer k-th root when it exists.
inline std::optional<BigInt> exact_root(const BigInt& n, unsigned k) {
    if (n < 0) {
        if (k % 2 == 0) return std::nullopt;
        auto r = exact_root(-n, k);
        if (r) return -*r;
        return std::nullopt;
    }
    if (n == 0 || n == 1 || k == 1) return n;
    BigInt lo = 0, hi = n;
    while (lo < hi) {
        BigInt mid = (lo + hi + 1) / 2;
        if (big_pow(mid, k) <= n) lo = mid;
        else hi = mid - 1;
    }
    if (big_pow(lo, k) == n) return lo;
    return std::nullopt;
}

// b^(p/q) as an exact rational when b is a perfect q-th power.
inline std::optional<Rat> exact_rat_pow(const Rat& b, const Rat& e) {
    if (is_integer(e)) {
        if (rat_num(e) > 1000000 || rat_num(e) < -1000000) return std::nullopt;
        return rat_pow(b, static_cast<long>(rat_num(e)));
    }
    BigInt q = rat_den(e);
    if (q > 64) return std::nullopt;
    auto rn = exact_root(rat_num(b), static_cast<unsigned>(q));
    auto rd = exact_root(rat_den(b), static_cast<unsigned>(q));
    if (!rn || !rd) return std::nullopt;
    BigInt p = rat_num(e);
    if (p > 1024 || p < -1024) return std::nullopt;
    return rat_pow(Rat(*rn, *rd), static_cast<long>(p));
}

inline std::string rat_to_string(const Rat& r) {
    if (is_integer(r)) return rat_num(r).str();
    return rat_num(r).str() + "/" + rat_den(r).str();
}

}  // namespace symline
