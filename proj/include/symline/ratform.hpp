#pragma once

// Rational normal form over kernels. Every maximal non-rational subterm
// (function call, elementary call, integral, symbolic power, exponential)
// becomes a polynomial variable; the expression is then a fraction of
// multivariate polynomials over Q. Powers of a common base with rationally
// dependent exponents share one kernel: x^(2a) and x^(3a) both live over the
// kernel x^a, and exp(6u) over exp(u). Fractional powers of rational bases
// carry a reduction rule K^D = base so that e.g. sqrt(v)^2 collapses to v.

#include "symline/expr.hpp"
#include "symline/poly.hpp"

#include <map>
#include <vector>

namespace symline {

struct Kernel {
    Expr tag;  // the expression the kernel variable stands for
    bool has_relation = false;
    int rel_pow = 0;  // kernel^rel_pow == rel_num / rel_den over the other kernels
    Poly rel_num, rel_den;
};

struct Fraction {
    Poly num, den;
};

class RatForm {
  public:
    std::vector<Kernel> kernels;
    Fraction value;

    Expr to_expr() const {
        if (value.num.is_zero()) return zero();
        return div(poly_to_expr(value.num), poly_to_expr(value.den));
    }

    Expr poly_to_expr(const Poly& p) const {
        std::vector<Expr> terms;
        for (auto& [m, c] : p.terms) {
            std::vector<Expr> fs;
            fs.push_back(num(c));
            for (size_t i = 0; i < m.size(); ++i)
                if (m[i] != 0) fs.push_back(pow(kernels[i].tag, num(Rat(m[i]))));
            terms.push_back(mul(std::move(fs)));
        }
        return add(std::move(terms));
    }
};

Expr ratnormal(const Expr& e);

namespace detail {

struct KernelKey {
    int type;  // 0 plain atom, 1 power group, 2 exp group
    Expr base;
    Expr prim;
    bool operator<(const KernelKey& o) const {
        if (type != o.type) return type < o.type;
        int c = compare(base, o.base);
        if (c != 0) return c < 0;
        return compare(prim, o.prim) < 0;
    }
};

class Normalizer {
  public:
    RatForm run(const Expr& e) {
        detail::NormBudgetScope budget;
        Expr c = deep_canon(e);
        collect(c);
        finalize_kernels();
        rf_.value = simplify(build(c));
        return std::move(rf_);
    }

  private:
    RatForm rf_;
    std::map<KernelKey, BigInt> group_den_;  // lcm of coefficient denominators
    std::map<KernelKey, int> index_;
    std::vector<std::pair<KernelKey, Expr>> pending_relation_;  // key, base

    int nv() const { return static_cast<int>(rf_.kernels.size()); }

    // recursively normalize the arguments buried inside atoms, so that two
    // atoms with semantically equal arguments compare structurally equal
    Expr deep_canon(const Expr& e) {
        switch (e->kind) {
            case Kind::Num:
            case Kind::Sym:
            case Kind::Par:
                return e;
            case Kind::Sum: {
                std::vector<Expr> ks;
                for (auto& k : e->kids) ks.push_back(deep_canon(k));
                return add(std::move(ks));
            }
            case Kind::Prod: {
                std::vector<Expr> ks;
                for (auto& k : e->kids) ks.push_back(deep_canon(k));
                return mul(std::move(ks));
            }
            case Kind::Pow:
                return pow(deep_canon(e->kids[0]), deep_canon(e->kids[1]));
            case Kind::Elem:
                return elem(e->fn, ratnormal(e->kids[0]));
            case Kind::Fun:
                return fun(e->name, ratnormal(e->kids[0]), e->order);
            case Kind::Int:
                return integral(ratnormal(e->kids[0]), e->var);
            case Kind::IntTo:
                return integral_to(ratnormal(e->kids[0]), e->var, ratnormal(e->kids[1]));
        }
        throw MathError("unreachable");
    }

    static std::pair<Rat, Expr> split_exponent(const Expr& expo) {
        return exponent_content(expo);
    }

    void note_group(const KernelKey& key, const Rat& coeff) {
        BigInt& d = group_den_[key];
        if (d == 0) d = 1;
        d = big_lcm(d, rat_den(coeff));
    }

    void collect(const Expr& e) {
        switch (e->kind) {
            case Kind::Num:
            case Kind::Sym:
            case Kind::Par:
                if (e->kind != Kind::Num) note_group({0, e, one()}, Rat(1));
                return;
            case Kind::Sum:
            case Kind::Prod:
                for (auto& k : e->kids) collect(k);
                return;
            case Kind::Pow: {
                const Expr& b = e->kids[0];
                const Expr& x = e->kids[1];
                if (x->kind == Kind::Num && is_integer(x->value)) {
                    collect(b);
                    return;
                }
                auto [c, prim] = split_exponent(x);
                note_group({1, b, prim}, c);
                if (is_one_expr(prim)) collect(b);  // relation will need the base atoms
                else collect(x);
                return;
            }
            case Kind::Elem:
                if (e->fn == ElemFn::Exp) {
                    auto [c, prim] = split_exponent(e->kids[0]);
                    if (prim->kind != Kind::Num) {
                        note_group({2, one(), prim}, c);
                        return;
                    }
                }
                note_group({0, e, one()}, Rat(1));
                return;
            case Kind::Fun:
            case Kind::Int:
            case Kind::IntTo:
                note_group({0, e, one()}, Rat(1));
                return;
        }
    }

    void finalize_kernels() {
        // exp(rational) without a symbolic part never reaches note_group; make
        // sure such atoms still have a kernel (they are transcendental)
        std::vector<std::pair<Expr, KernelKey>> tagged;
        for (auto& [key, d] : group_den_) {
            Expr tag;
            if (key.type == 0) {
                tag = key.base;
            } else if (key.type == 1) {
                tag = pow(key.base, mul(num(Rat(1, d)), key.prim));
            } else {
                tag = elem(ElemFn::Exp, mul(num(Rat(1, d)), key.prim));
            }
            tagged.push_back({tag, key});
        }
        std::sort(tagged.begin(), tagged.end(),
                  [](const auto& a, const auto& b) { return compare(a.first, b.first) < 0; });
        for (auto& [tag, key] : tagged) {
            index_[key] = nv();
            Kernel k;
            k.tag = tag;
            rf_.kernels.push_back(std::move(k));
            if (key.type == 1 && is_one_expr(key.prim) && group_den_[key] > 1)
                pending_relation_.push_back({key, key.base});
        }
        for (auto& [key, base] : pending_relation_) {
            int i = index_[key];
            Fraction f = simplify(build(base));
            // the relation must not mention the kernel itself
            bool self = false;
            for (auto& [m, c] : f.num.terms) self |= m[static_cast<size_t>(i)] != 0;
            for (auto& [m, c] : f.den.terms) self |= m[static_cast<size_t>(i)] != 0;
            if (self) continue;
            Kernel& k = rf_.kernels[static_cast<size_t>(i)];
            k.has_relation = true;
            k.rel_pow = static_cast<int>(group_den_[key]);
            k.rel_num = f.num;
            k.rel_den = f.den;
        }
    }

    Fraction f_const(const Rat& c) const { return {Poly::constant(nv(), c), Poly::constant(nv(), 1)}; }

    Fraction f_kernel(int i, long p) const {
        Fraction f = f_const(1);
        if (p > 0) f.num = Poly::variable(nv(), i, static_cast<int>(p));
        else if (p < 0) f.den = Poly::variable(nv(), i, static_cast<int>(-p));
        return f;
    }

    Fraction f_add(const Fraction& a, const Fraction& b) const {
        return reduce({a.num * b.den + b.num * a.den, a.den * b.den});
    }

    Fraction f_mul(const Fraction& a, const Fraction& b) const {
        return reduce({a.num * b.num, a.den * b.den});
    }

    Fraction f_pow(Fraction a, long e) const {
        if (e < 0) {
            std::swap(a.num, a.den);
            e = -e;
        }
        Fraction r = f_const(1);
        while (e) {
            if (e & 1) r = f_mul(r, a);
            if (e >>= 1) a = f_mul(a, a);
        }
        return r;
    }

    bool needs_reduction(const Poly& p, int i, int D) const {
        for (auto& [m, c] : p.terms)
            if (m[static_cast<size_t>(i)] >= D) return true;
        return false;
    }

    // rewrite kernel powers >= rel_pow through the algebraic relation
    Fraction reduce(Fraction f) const {
        for (int i = 0; i < nv(); ++i) {
            const Kernel& k = rf_.kernels[static_cast<size_t>(i)];
            if (!k.has_relation) continue;
            if (!needs_reduction(f.num, i, k.rel_pow) && !needs_reduction(f.den, i, k.rel_pow)) continue;
            Fraction n = reduce_poly_frac(f.num, i);
            Fraction d = reduce_poly_frac(f.den, i);
            f = {n.num * d.den, d.num * n.den};
        }
        return f;
    }

    Fraction reduce_poly_frac(const Poly& p, int i) const {
        const Kernel& k = rf_.kernels[static_cast<size_t>(i)];
        int D = k.rel_pow;
        Fraction acc = {Poly::constant(nv(), 0), Poly::constant(nv(), 1)};
        for (auto& [m, c] : p.terms) {
            int e = m[static_cast<size_t>(i)];
            int q = e / D, r = e % D;
            std::vector<int> m2 = m;
            m2[static_cast<size_t>(i)] = r;
            Poly term;
            term.nvars = nv();
            term.terms[m2] = c;
            Fraction tf = {term, Poly::constant(nv(), 1)};
            if (q != 0) {
                Fraction rel = {k.rel_num, k.rel_den};
                tf = f_mul_noreduce(tf, f_pow_noreduce(rel, q));
            }
            acc = {acc.num * tf.den + tf.num * acc.den, acc.den * tf.den};
        }
        return acc;
    }

    static Fraction f_mul_noreduce(const Fraction& a, const Fraction& b) {
        return {a.num * b.num, a.den * b.den};
    }

    static Fraction f_pow_noreduce(Fraction a, long e) {
        if (e < 0) {
            std::swap(a.num, a.den);
            e = -e;
        }
        Fraction r = {Poly::constant(a.num.nvars, 1), Poly::constant(a.num.nvars, 1)};
        while (e) {
            if (e & 1) r = f_mul_noreduce(r, a);
            if (e >>= 1) a = f_mul_noreduce(a, a);
        }
        return r;
    }

    Fraction simplify(Fraction f) const {
        if (f.den.is_zero()) throw MathError("zero denominator in rational form");
        if (f.num.is_zero()) return {Poly::constant(nv(), 0), Poly::constant(nv(), 1)};
        Poly g = Poly::constant(nv(), 1);
        try {
            g = poly_gcd(f.num, f.den);
        } catch (const GcdBudgetExceeded&) {
            // a single gcd giving up is survivable (the fraction stays
            // uncancelled); a spent normalize budget is not
            if (norm_budget_spent()) throw;
        }
        if (!g.is_constant() || g.constant_value() != 1) {
            f.num = poly_divexact(f.num, g);
            f.den = poly_divexact(f.den, g);
        }
        Poly dn = poly_primitive_normal(f.den);
        // scale numerator by the same factor den was scaled by
        auto lead_d = std::prev(f.den.terms.end());
        auto lead_dn = dn.terms.find(lead_d->first);
        Rat s = lead_dn->second / lead_d->second;
        f.den = dn;
        f.num = f.num * s;
        return f;
    }

    Fraction build(const Expr& e) {
        switch (e->kind) {
            case Kind::Num:
                return f_const(e->value);
            case Kind::Sym:
            case Kind::Par:
                return f_kernel(index_.at({0, e, one()}), 1);
            case Kind::Sum: {
                Fraction f = f_const(0);
                for (auto& k : e->kids) f = f_add(f, build(k));
                return f;
            }
            case Kind::Prod: {
                Fraction f = f_const(1);
                for (auto& k : e->kids) f = f_mul(f, build(k));
                return f;
            }
            case Kind::Pow: {
                const Expr& b = e->kids[0];
                const Expr& x = e->kids[1];
                if (x->kind == Kind::Num && is_integer(x->value)) {
                    if (rat_num(x->value) > 512 || rat_num(x->value) < -512)
                        throw MathError("exponent too large for rational form");
                    return f_pow(build(b), static_cast<long>(rat_num(x->value)));
                }
                auto [c, prim] = split_exponent(x);
                KernelKey key{1, b, prim};
                BigInt d = group_den_.at(key);
                Rat scaled = c * Rat(d);
                return f_kernel(index_.at(key), static_cast<long>(rat_num(scaled)));
            }
            case Kind::Elem: {
                if (e->fn == ElemFn::Exp) {
                    auto [c, prim] = split_exponent(e->kids[0]);
                    if (prim->kind != Kind::Num) {
                        KernelKey key{2, one(), prim};
                        BigInt d = group_den_.at(key);
                        Rat scaled = c * Rat(d);
                        return f_kernel(index_.at(key), static_cast<long>(rat_num(scaled)));
                    }
                }
                return f_kernel(index_.at({0, e, one()}), 1);
            }
            case Kind::Fun:
            case Kind::Int:
            case Kind::IntTo:
                return f_kernel(index_.at({0, e, one()}), 1);
        }
        throw MathError("unreachable");
    }
};

}  // namespace detail

inline RatForm rat_normalize(const Expr& e) { return detail::Normalizer().run(e); }

inline Expr ratnormal(const Expr& e) {
    RatForm rf = rat_normalize(e);
    if (rf.value.num.is_zero()) return zero();
    Expr n = rf.poly_to_expr(rf.value.num);
    if (rf.value.den.is_constant()) return div(n, num(rf.value.den.constant_value()));
    return div(n, rf.poly_to_expr(rf.value.den));
}

// structural zero test: the expression is identically zero as a rational
// function of its kernels
inline bool rat_is_zero(const Expr& e) { return rat_normalize(e).value.num.is_zero(); }

}  // namespace symline
