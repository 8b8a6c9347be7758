#pragma once

// Sparse multivariate polynomials over Q with exact division and a
// content/subresultant-PRS gcd, plus dense univariate polynomials over Q
// used by the integrator's partial-fraction machinery.

#include "symline/rational.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <vector>

namespace symline {

// ---------------------------------------------------------------------------
// multivariate

struct Poly {
    int nvars = 0;
    std::map<std::vector<int>, Rat> terms;  // exponent vector -> coefficient

    static Poly constant(int nvars, const Rat& c) {
        Poly p;
        p.nvars = nvars;
        if (c != 0) p.terms[std::vector<int>(nvars, 0)] = c;
        return p;
    }
    static Poly variable(int nvars, int i, int e = 1) {
        Poly p;
        p.nvars = nvars;
        std::vector<int> m(nvars, 0);
        m[i] = e;
        p.terms[m] = 1;
        return p;
    }
    bool is_zero() const { return terms.empty(); }
    bool is_constant() const {
        if (terms.empty()) return true;
        return terms.size() == 1 && terms.begin()->first == std::vector<int>(nvars, 0);
    }
    Rat constant_value() const {
        if (terms.empty()) return Rat(0);
        return terms.begin()->second;
    }
    int degree(int v) const {
        int d = 0;
        for (auto& [m, c] : terms) d = std::max(d, m[v]);
        return d;
    }
    int total_degree() const {
        int d = 0;
        for (auto& [m, c] : terms) {
            int s = 0;
            for (int e : m) s += e;
            d = std::max(d, s);
        }
        return d;
    }
};

// gcd computations carry a deterministic work budget: pathological inputs
// (PRS coefficient swell, heuristic-gcd digit growth) abort instead of
// stalling, and the caller falls back to the uncancelled form
struct GcdBudgetExceeded : MathError {
    GcdBudgetExceeded() : MathError("polynomial gcd work budget exceeded") {}
};

namespace detail {

inline thread_local long gcd_depth = 0;   // nesting of poly_gcd budget scopes
inline thread_local long gcd_ops = 0;     // charge of the current top-level gcd
inline thread_local long norm_depth = 0;  // nesting of normalize budget scopes
inline thread_local long norm_ops = 0;    // charge of the current normalize
// cumulative charge since the last work_reset; callers that try many exact
// simplifications in a loop (the integrator above all) consult this to stop
// burning per-call budgets one after another on a hopeless expression
inline thread_local long work_total = 0;

struct GcdBudgetScope {
    GcdBudgetScope() {
        if (gcd_depth++ == 0) gcd_ops = 0;
    }
    ~GcdBudgetScope() { --gcd_depth; }
};

struct NormBudgetScope {
    NormBudgetScope() {
        if (norm_depth++ == 0) norm_ops = 0;
    }
    ~NormBudgetScope() { --norm_depth; }
};

inline void work_reset() { work_total = 0; }
inline bool work_budget_spent() { return work_total > 12000000; }
inline bool norm_budget_spent() { return norm_depth > 0 && norm_ops > 2000000; }

inline void gcd_tick(const Rat& c, long weight = 1) {
    if (gcd_depth == 0 && norm_depth == 0) return;
    long bits = 0;
    const BigInt& n = rat_num(c);
    const BigInt& d = rat_den(c);
    if (n != 0) bits += static_cast<long>(boost::multiprecision::msb(boost::multiprecision::abs(n)));
    if (d != 0) bits += static_cast<long>(boost::multiprecision::msb(d));
    // bignum arithmetic is superlinear in operand size; charge accordingly
    long b32 = bits / 32;
    long charge = weight + b32 + b32 * b32 / 8;
    work_total += charge;
    if (gcd_depth > 0) {
        gcd_ops += charge;
        if (gcd_ops > 2000000) throw GcdBudgetExceeded();
    }
    if (norm_depth > 0) {
        norm_ops += charge;
        if (norm_ops > 2000000) throw GcdBudgetExceeded();
    }
}

}  // namespace detail

inline Poly operator+(const Poly& a, const Poly& b) {
    Poly r = a;
    for (auto& [m, c] : b.terms) {
        detail::gcd_tick(c);
        auto it = r.terms.find(m);
        if (it == r.terms.end()) {
            r.terms[m] = c;
        } else {
            it->second += c;
            if (it->second == 0) r.terms.erase(it);
        }
    }
    return r;
}


inline Poly operator-(const Poly& a) {
    Poly r = a;
    for (auto& [m, c] : r.terms) c = -c;
    return r;
}

inline Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }

inline Poly operator*(const Poly& a, const Poly& b) {
    Poly r;
    r.nvars = a.nvars;
    for (auto& [ma, ca] : a.terms) {
        detail::gcd_tick(ca, static_cast<long>(b.terms.size()));
        for (auto& [mb, cb] : b.terms) {
            std::vector<int> m(a.nvars);
            for (int i = 0; i < a.nvars; ++i) m[i] = ma[i] + mb[i];
            auto it = r.terms.find(m);
            if (it == r.terms.end()) {
                Rat c = ca * cb;
                if (c != 0) r.terms[std::move(m)] = c;
            } else {
                it->second += ca * cb;
                if (it->second == 0) r.terms.erase(it);
            }
        }
    }
    return r;
}

inline Poly operator*(const Poly& a, const Rat& c) {
    if (c == 0) return Poly::constant(a.nvars, 0);
    Poly r = a;
    for (auto& [m, cc] : r.terms) cc *= c;
    return r;
}

inline Poly poly_pow(const Poly& a, int e) {
    Poly r = Poly::constant(a.nvars, 1);
    Poly b = a;
    while (e) {
        if (e & 1) r = r * b;
        if (e >>= 1) b = b * b;
    }
    return r;
}

// exact multivariate division; throws MathError when not divisible
inline Poly poly_divexact(Poly a, const Poly& b) {
    if (b.is_zero()) throw MathError("polynomial division by zero");
    Poly q;
    q.nvars = a.nvars;
    auto blead = std::prev(b.terms.end());  // lex-largest monomial
    while (!a.terms.empty()) {
        auto alead = std::prev(a.terms.end());
        detail::gcd_tick(alead->second, static_cast<long>(b.terms.size()));
        std::vector<int> m(a.nvars);
        for (int i = 0; i < a.nvars; ++i) {
            m[i] = alead->first[i] - blead->first[i];
            if (m[i] < 0) throw MathError("inexact polynomial division");
        }
        Rat c = alead->second / blead->second;
        Poly t;
        t.nvars = a.nvars;
        t.terms[m] = c;
        q = q + t;
        a = a - t * b;
    }
    return q;
}

inline bool poly_divides(const Poly& b, const Poly& a) {
    try {
        poly_divexact(a, b);
        return true;
    } catch (const MathError&) {
        return false;
    }
}

namespace detail {

// univariate view in variable v: coefficient polys indexed by power of v
inline std::vector<Poly> uni_view(const Poly& p, int v) {
    std::vector<Poly> cs(static_cast<size_t>(p.degree(v)) + 1);
    for (auto& c : cs) c.nvars = p.nvars;
    for (auto& [m, coef] : p.terms) {
        std::vector<int> m2 = m;
        int e = m2[v];
        m2[v] = 0;
        cs[e].terms[m2] = coef;
    }
    while (cs.size() > 1 && cs.back().is_zero()) cs.pop_back();
    return cs;
}

inline Poly from_uni_view(const std::vector<Poly>& cs, int v, int nvars) {
    Poly r;
    r.nvars = nvars;
    for (size_t e = 0; e < cs.size(); ++e) {
        for (auto& [m, coef] : cs[e].terms) {
            std::vector<int> m2 = m;
            m2[v] += static_cast<int>(e);
            r.terms[m2] = coef;
        }
    }
    return r;
}

}  // namespace detail

Poly poly_gcd(Poly a, Poly b);

// integer-normalized form: content 1 over Z, positive leading coefficient (lex)
inline Poly poly_primitive_normal(const Poly& p) {
    if (p.is_zero()) return p;
    BigInt num_gcd = 0, den_lcm = 1;
    for (auto& [m, c] : p.terms) {
        num_gcd = big_gcd(num_gcd, boost::multiprecision::abs(rat_num(c)));
        den_lcm = big_lcm(den_lcm, rat_den(c));
    }
    Rat scale = Rat(den_lcm, num_gcd);
    Poly r = p * scale;
    if (std::prev(r.terms.end())->second < 0) r = -r;
    return r;
}

// content of p as a univariate polynomial in v (gcd of coefficient polys)
inline Poly poly_content(const Poly& p, int v) {
    auto cs = detail::uni_view(p, v);
    Poly g = Poly::constant(p.nvars, 0);
    for (auto& c : cs) {
        if (c.is_zero()) continue;
        g = poly_gcd(g, c);
        if (g.is_constant()) break;
    }
    return g;
}

namespace detail {

// pseudo-remainder of univariate-view polynomials
inline std::vector<Poly> pseudo_rem(std::vector<Poly> a, const std::vector<Poly>& b, int nvars) {
    if (b.size() == 1 && b[0].is_zero()) throw MathError("pseudo_rem by zero");
    const Poly& lb = b.back();
    int db = static_cast<int>(b.size()) - 1;
    auto trim = [](std::vector<Poly>& p) {
        while (p.size() > 1 && p.back().is_zero()) p.pop_back();
    };
    trim(a);
    int da = static_cast<int>(a.size()) - 1;
    if ((da == 0 && a[0].is_zero()) || da < db) {
        // premultiply for the standard exponent convention
        int e = da - db + 1;
        if (e > 0) {
            Poly f = poly_pow(lb, e);
            for (auto& c : a) c = c * f;
        }
        return a;
    }
    int e = da - db + 1;
    while (static_cast<int>(a.size()) - 1 >= db && !(a.size() == 1 && a[0].is_zero())) {
        int d = static_cast<int>(a.size()) - 1 - db;
        Poly la = a.back();
        for (auto& c : a) c = c * lb;
        // subtract la * x^d * b
        for (int i = 0; i <= db; ++i) a[static_cast<size_t>(i + d)] = a[static_cast<size_t>(i + d)] - la * b[static_cast<size_t>(i)];
        trim(a);
        --e;
        if (a.size() == 1 && a[0].is_zero()) break;
    }
    if (e > 0) {
        Poly f = poly_pow(lb, e);
        for (auto& c : a) c = c * f;
    }
    return a;
}

bool gcd_image_shortcut(const Poly& pa, const Poly& pb, int v);

inline BigInt poly_max_abs(const Poly& p) {
    BigInt m = 0;
    for (auto& [mo, c] : p.terms) {
        BigInt a = boost::multiprecision::abs(rat_num(c));
        if (a > m) m = a;
    }
    return m;
}

// p with variable v evaluated at the integer xi
inline Poly poly_eval_var_int(const Poly& p, int v, const BigInt& xi) {
    Poly r;
    r.nvars = p.nvars;
    for (auto& [m, c] : p.terms) {
        std::vector<int> m2 = m;
        int e = m2[static_cast<size_t>(v)];
        m2[static_cast<size_t>(v)] = 0;
        gcd_tick(c, e);
        Rat t = c * Rat(big_pow(xi, static_cast<unsigned long>(e)));
        auto it = r.terms.find(m2);
        if (it == r.terms.end()) {
            if (t != 0) r.terms[std::move(m2)] = t;
        } else {
            it->second += t;
            if (it->second == 0) r.terms.erase(it);
        }
    }
    return r;
}

// balanced remainder in [-xi/2, xi/2)
inline BigInt balanced_mod(const BigInt& a, const BigInt& xi) {
    BigInt r = a % xi;
    if (r < 0) r += xi;
    if (2 * r >= xi) r -= xi;
    return r;
}

// heuristic gcd of integer-coefficient polynomials: evaluate one variable at
// a large integer, take the gcd of the images recursively, lift it back via
// balanced base-xi digits and verify by exact division
inline std::optional<Poly> heugcd(const Poly& a, const Poly& b, int depth) {
    if (depth > 10) return std::nullopt;
    int v = -1;
    for (int i = a.nvars - 1; i >= 0; --i)
        if (a.degree(i) > 0 || b.degree(i) > 0) {
            v = i;
            break;
        }
    if (v < 0) {
        BigInt g = big_gcd(poly_max_abs(a), poly_max_abs(b));
        return Poly::constant(a.nvars, Rat(g));
    }
    BigInt ma = poly_max_abs(a), mb = poly_max_abs(b);
    BigInt xi = 2 * (ma < mb ? ma : mb) + 29;
    int dmax = std::max(a.degree(v), b.degree(v));
    for (int attempt = 0; attempt < 4; ++attempt) {
        // the evaluated coefficients pick up msb(xi)*(dmax+1) bits per level;
        // give up before the compounding gets out of hand
        if ((static_cast<long>(boost::multiprecision::msb(xi)) + 1) *
                static_cast<long>(dmax + 1) > 40000)
            return std::nullopt;
        Poly ea = poly_eval_var_int(a, v, xi), eb = poly_eval_var_int(b, v, xi);
        if (!ea.is_zero() && !eb.is_zero()) {
            auto g = heugcd(ea, eb, depth + 1);
            if (!g) return std::nullopt;  // deeper level gave up; retrying only compounds
            {
                Poly G;
                G.nvars = a.nvars;
                Poly cur = *g;
                int e = 0;
                for (; !cur.is_zero() && e <= dmax; ++e) {
                    Poly next;
                    next.nvars = a.nvars;
                    for (auto& [m, c] : cur.terms) {
                        BigInt ci = rat_num(c);
                        BigInt d = balanced_mod(ci, xi);
                        if (d != 0) {
                            std::vector<int> m2 = m;
                            m2[static_cast<size_t>(v)] = e;
                            G.terms[std::move(m2)] = Rat(d);
                        }
                        BigInt rest = (ci - d) / xi;
                        if (rest != 0) next.terms[m] = Rat(rest);
                    }
                    cur = std::move(next);
                }
                // G keeps its integer content: parent levels lift its base-xi
                // digits, so normalizing here would lose information
                if (cur.is_zero() && !G.is_zero() &&
                    poly_divides(G, a) && poly_divides(G, b))
                    return G;
            }
        }
        xi = xi * 73794 / 27011;
    }
    return std::nullopt;
}

}  // namespace detail

inline Poly poly_gcd(Poly a, Poly b) {
    if (a.is_zero()) return poly_primitive_normal(b);
    if (b.is_zero()) return poly_primitive_normal(a);
    if (a.is_constant() || b.is_constant()) return Poly::constant(a.nvars, 1);
    detail::GcdBudgetScope budget;
    // main variable: highest index occurring in either
    int v = -1;
    for (int i = a.nvars - 1; i >= 0; --i) {
        if (a.degree(i) > 0 || b.degree(i) > 0) {
            v = i;
            break;
        }
    }
    if (v < 0) return Poly::constant(a.nvars, 1);
    // heuristic gcd first; it settles almost every call, including the
    // ubiquitous coprime case, without the content/PRS cascade
    {
        Poly na = poly_primitive_normal(a), nb = poly_primitive_normal(b);
        if (auto g = detail::heugcd(na, nb, 0)) return poly_primitive_normal(*g);
    }
    Poly ca = poly_content(a, v), cb = poly_content(b, v);
    Poly pa = poly_divexact(a, ca), pb = poly_divexact(b, cb);
    Poly cg = poly_gcd(ca, cb);

    // evaluation shortcut: a divisor g of pa keeps its v-degree in the image
    // when lc_v(pa) survives the evaluation, and g's image divides the image
    // gcd; so an image gcd of degree 0 certifies deg_v(gcd) = 0, and since
    // gcds of v-primitive polynomials are v-primitive that means gcd = 1
    if (detail::gcd_image_shortcut(pa, pb, v)) return cg;
    if (pa.degree(v) >= pb.degree(v) && poly_divides(pb, pa)) return cg * poly_primitive_normal(pb);
    if (pb.degree(v) > pa.degree(v) && poly_divides(pa, pb)) return cg * poly_primitive_normal(pa);

    auto A = detail::uni_view(pa, v);
    auto B = detail::uni_view(pb, v);
    if (A.size() < B.size()) std::swap(A, B);
    // subresultant PRS
    Poly g = Poly::constant(a.nvars, 1), h = Poly::constant(a.nvars, 1);
    for (;;) {
        int d = static_cast<int>(A.size()) - static_cast<int>(B.size());
        auto R = detail::pseudo_rem(A, B, a.nvars);
        if (R.size() == 1 && R[0].is_zero()) break;
        if (R.size() == 1) {
            // nontrivial constant (in v) remainder: primitive gcd is 1
            return cg;
        }
        A = B;
        Poly divisor = g * poly_pow(h, d);
        for (auto& c : R) c = poly_divexact(c, divisor);
        B = R;
        g = A.back();
        // h = g^d * h^(1-d)
        if (d == 0) {
            // h unchanged
        } else if (d == 1) {
            h = g;
        } else {
            h = poly_divexact(poly_pow(g, d), poly_pow(h, d - 1));
        }
    }
    if (B.size() == 1) return cg;
    Poly prim = detail::from_uni_view(B, v, a.nvars);
    prim = poly_divexact(prim, poly_content(prim, v));
    return cg * prim;
}

inline Poly poly_derivative(const Poly& p, int v) {
    Poly r;
    r.nvars = p.nvars;
    for (auto& [m, c] : p.terms) {
        if (m[v] == 0) continue;
        std::vector<int> m2 = m;
        int e = m2[v]--;
        r.terms[m2] = c * e;
    }
    return r;
}

// ---------------------------------------------------------------------------
// dense univariate over Q

struct UPoly {
    std::vector<Rat> c;  // c[i] * x^i

    UPoly() = default;
    explicit UPoly(std::vector<Rat> cc) : c(std::move(cc)) { trim(); }
    static UPoly constant(const Rat& v) { return UPoly(v == 0 ? std::vector<Rat>{} : std::vector<Rat>{v}); }
    static UPoly x() { return UPoly({Rat(0), Rat(1)}); }

    void trim() {
        while (!c.empty() && c.back() == 0) c.pop_back();
    }
    bool is_zero() const { return c.empty(); }
    int deg() const { return static_cast<int>(c.size()) - 1; }
    Rat lc() const { return c.empty() ? Rat(0) : c.back(); }
    Rat eval(const Rat& x) const {
        Rat r = 0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * x + *it;
        return r;
    }
};

inline UPoly operator+(const UPoly& a, const UPoly& b) {
    std::vector<Rat> r(std::max(a.c.size(), b.c.size()), Rat(0));
    for (size_t i = 0; i < a.c.size(); ++i) r[i] += a.c[i];
    for (size_t i = 0; i < b.c.size(); ++i) r[i] += b.c[i];
    return UPoly(std::move(r));
}
inline UPoly operator-(const UPoly& a) {
    UPoly r = a;
    for (auto& v : r.c) v = -v;
    return r;
}
inline UPoly operator-(const UPoly& a, const UPoly& b) { return a + (-b); }
inline UPoly operator*(const UPoly& a, const UPoly& b) {
    if (a.is_zero() || b.is_zero()) return UPoly();
    std::vector<Rat> r(a.c.size() + b.c.size() - 1, Rat(0));
    for (size_t i = 0; i < a.c.size(); ++i)
        for (size_t j = 0; j < b.c.size(); ++j) r[i + j] += a.c[i] * b.c[j];
    return UPoly(std::move(r));
}
inline UPoly operator*(const UPoly& a, const Rat& s) {
    UPoly r = a;
    for (auto& v : r.c) v *= s;
    r.trim();
    return r;
}

inline std::pair<UPoly, UPoly> udivmod(UPoly a, const UPoly& b) {
    if (b.is_zero()) throw MathError("univariate division by zero");
    UPoly q;
    q.c.assign(a.c.size(), Rat(0));
    while (!a.is_zero() && a.deg() >= b.deg()) {
        int d = a.deg() - b.deg();
        Rat f = a.lc() / b.lc();
        q.c[static_cast<size_t>(d)] += f;
        for (size_t i = 0; i < b.c.size(); ++i) a.c[static_cast<size_t>(d) + i] -= f * b.c[i];
        a.trim();
    }
    q.trim();
    return {q, a};
}

inline UPoly udiv(const UPoly& a, const UPoly& b) { return udivmod(a, b).first; }
inline UPoly umod(const UPoly& a, const UPoly& b) { return udivmod(a, b).second; }

inline UPoly umonic(const UPoly& a) {
    if (a.is_zero()) return a;
    return a * (Rat(1) / a.lc());
}

inline UPoly ugcd(UPoly a, UPoly b) {
    while (!b.is_zero()) {
        UPoly r = umod(a, b);
        a = b;
        b = r;
    }
    return umonic(a);
}

// returns (g, s, t) with s*a + t*b = g, g monic
inline std::tuple<UPoly, UPoly, UPoly> uext_gcd(const UPoly& a, const UPoly& b) {
    UPoly r0 = a, r1 = b;
    UPoly s0 = UPoly::constant(1), s1;
    UPoly t0, t1 = UPoly::constant(1);
    while (!r1.is_zero()) {
        auto [q, r] = udivmod(r0, r1);
        UPoly s = s0 - q * s1, t = t0 - q * t1;
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s;
        t0 = t1;
        t1 = t;
    }
    if (r0.is_zero()) return {r0, s0, t0};
    Rat inv = Rat(1) / r0.lc();
    return {r0 * inv, s0 * inv, t0 * inv};
}

inline UPoly uderiv(const UPoly& a) {
    if (a.c.size() <= 1) return UPoly();
    std::vector<Rat> r(a.c.size() - 1);
    for (size_t i = 1; i < a.c.size(); ++i) r[i - 1] = a.c[i] * Rat(static_cast<long>(i));
    return UPoly(std::move(r));
}

inline UPoly upow(const UPoly& a, int e) {
    UPoly r = UPoly::constant(1), b = a;
    while (e) {
        if (e & 1) r = r * b;
        if (e >>= 1) b = b * b;
    }
    return r;
}

// square-free decomposition (Yun): a = prod f_i^i, returns [f_1, f_2, ...]
inline std::vector<UPoly> usquarefree(const UPoly& a) {
    std::vector<UPoly> out;
    if (a.deg() <= 0) return out;
    UPoly b = umonic(a);
    UPoly d = uderiv(b);
    UPoly g = ugcd(b, d);
    UPoly w = udiv(b, g), y = udiv(d, g);
    UPoly z = y - uderiv(w);
    while (!z.is_zero()) {
        UPoly f = ugcd(w, z);
        out.push_back(f);
        w = udiv(w, f);
        y = udiv(z, f);
        z = y - uderiv(w);
    }
    out.push_back(w);
    return out;
}

// all rational roots with multiplicity stripped off; returns (roots, remaining factor)
inline std::pair<std::vector<Rat>, UPoly> urational_roots(UPoly a) {
    std::vector<Rat> roots;
    if (a.is_zero()) return {roots, a};
    // strip x = 0 roots
    size_t shift = 0;
    while (shift < a.c.size() && a.c[shift] == 0) ++shift;
    if (shift) {
        for (size_t i = 0; i < shift; ++i) roots.push_back(Rat(0));
        a.c.erase(a.c.begin(), a.c.begin() + static_cast<long>(shift));
    }
    // clear denominators
    BigInt den_lcm = 1;
    for (auto& v : a.c) den_lcm = big_lcm(den_lcm, rat_den(v));
    std::vector<BigInt> ic(a.c.size());
    for (size_t i = 0; i < a.c.size(); ++i) ic[i] = BigInt(a.c[i] * Rat(den_lcm));
    if (ic.empty()) return {roots, a};
    auto divisors = [](BigInt n) {
        n = boost::multiprecision::abs(n);
        std::vector<BigInt> ds;
        for (BigInt i = 1; i * i <= n && i < 100000; ++i) {
            if (n % i == 0) {
                ds.push_back(i);
                if (i * i != n) ds.push_back(n / i);
            }
        }
        return ds;
    };
    bool changed = true;
    while (changed && a.deg() >= 1) {
        changed = false;
        BigInt c0 = 0, cl = 0;
        {
            BigInt dl = 1;
            for (auto& v : a.c) dl = big_lcm(dl, rat_den(v));
            c0 = BigInt(a.c.front() * Rat(dl));
            cl = BigInt(a.c.back() * Rat(dl));
        }
        if (c0 == 0) {
            roots.push_back(Rat(0));
            a.c.erase(a.c.begin());
            changed = true;
            continue;
        }
        for (auto& p : divisors(c0)) {
            for (auto& q : divisors(cl)) {
                for (int s : {1, -1}) {
                    Rat r(p * s, q);
                    if (a.eval(r) == 0) {
                        roots.push_back(r);
                        // deflate by (x - r)
                        a = udiv(a, UPoly({-r, Rat(1)}));
                        changed = true;
                        goto next_round;
                    }
                }
            }
        }
    next_round:;
    }
    return {roots, a};
}

namespace detail {

// true when the univariate images at some evaluation point certify that the
// gcd of the v-primitive polynomials pa, pb has v-degree 0 (hence is 1)
inline bool gcd_image_shortcut(const Poly& pa, const Poly& pb, int v) {
    int da = pa.degree(v), db = pb.degree(v);
    for (int attempt = 0; attempt < 4; ++attempt) {
        std::vector<Rat> vals(static_cast<size_t>(pa.nvars));
        for (int i = 0; i < pa.nvars; ++i)
            vals[static_cast<size_t>(i)] = Rat(((i * 7 + attempt * 13) % 23) + 2 + attempt);
        UPoly ia, ib;
        ia.c.assign(static_cast<size_t>(da) + 1, Rat(0));
        ib.c.assign(static_cast<size_t>(db) + 1, Rat(0));
        auto accumulate = [&](const Poly& p, UPoly& u) {
            for (auto& [m, c] : p.terms) {
                Rat t = c;
                for (int i = 0; i < p.nvars; ++i)
                    if (i != v && m[static_cast<size_t>(i)] != 0)
                        t *= rat_pow(vals[static_cast<size_t>(i)], m[static_cast<size_t>(i)]);
                u.c[static_cast<size_t>(m[static_cast<size_t>(v)])] += t;
            }
            u.trim();
        };
        accumulate(pa, ia);
        accumulate(pb, ib);
        // the leading coefficient must survive so divisor degrees are kept
        if (ia.deg() != da && ib.deg() != db) continue;
        const UPoly& keep = ia.deg() == da ? ia : ib;
        const UPoly& other = ia.deg() == da ? ib : ia;
        if (other.is_zero()) continue;
        if (ugcd(keep, other).deg() == 0) return true;
        return false;
    }
    return false;
}

}  // namespace detail

}  // namespace symline
