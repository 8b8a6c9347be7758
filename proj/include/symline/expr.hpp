#pragma once

// Immutable symbolic expression trees with structurally canonical constructors.
// Canonical form: sums/products flattened and sorted under a fixed total order,
// rational constants folded, 0/1 identities absorbed, exponents with a rational
// part split off (x^(a-1) -> x^a * x^(-1)), exp/ln folded against each other.

#include "symline/rational.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace symline {

enum class Kind : uint8_t { Num, Sym, Par, Pow, Elem, Fun, Int, IntTo, Sum, Prod };

enum class ElemFn : uint8_t { Exp, Ln, Sin, Cos, Tan, Arctan };

inline const char* elem_name(ElemFn f) {
    switch (f) {
        case ElemFn::Exp: return "exp";
        case ElemFn::Ln: return "ln";
        case ElemFn::Sin: return "sin";
        case ElemFn::Cos: return "cos";
        case ElemFn::Tan: return "tan";
        case ElemFn::Arctan: return "arctan";
    }
    return "?";
}

struct Node;
using Expr = std::shared_ptr<const Node>;

struct Node {
    Kind kind;
    Rat value;               // Num
    std::string name;        // Sym / Par / Fun
    int order = 0;           // Fun derivative order
    ElemFn fn = ElemFn::Exp; // Elem
    std::string var;         // Int: variable; IntTo: dummy
    std::vector<Expr> kids;  // Pow: {base, expo}; Elem/Fun: {arg};
                             // Int: {integrand}; IntTo: {integrand, upper};
                             // Sum/Prod: operands
};

// ---------------------------------------------------------------------------
// total order

inline int kind_rank(Kind k) {
    switch (k) {
        case Kind::Num: return 0;
        case Kind::Sym: return 1;
        case Kind::Par: return 2;
        case Kind::Pow: return 3;
        case Kind::Elem: return 4;
        case Kind::Fun: return 5;
        case Kind::Int: return 6;
        case Kind::IntTo: return 7;
        case Kind::Sum: return 8;
        case Kind::Prod: return 9;
    }
    return 10;
}

inline int compare(const Expr& a, const Expr& b) {
    if (a.get() == b.get()) return 0;
    int ra = kind_rank(a->kind), rb = kind_rank(b->kind);
    if (ra != rb) return ra < rb ? -1 : 1;
    switch (a->kind) {
        case Kind::Num:
            return a->value < b->value ? -1 : (a->value == b->value ? 0 : 1);
        case Kind::Sym:
        case Kind::Par: {
            int c = a->name.compare(b->name);
            return c < 0 ? -1 : (c == 0 ? 0 : 1);
        }
        case Kind::Elem:
            if (a->fn != b->fn) return a->fn < b->fn ? -1 : 1;
            break;
        case Kind::Fun: {
            int c = a->name.compare(b->name);
            if (c != 0) return c < 0 ? -1 : 1;
            if (a->order != b->order) return a->order < b->order ? -1 : 1;
            break;
        }
        case Kind::Int:
        case Kind::IntTo: {
            int c = a->var.compare(b->var);
            if (c != 0) return c < 0 ? -1 : 1;
            break;
        }
        default:
            break;
    }
    size_t n = std::min(a->kids.size(), b->kids.size());
    for (size_t i = 0; i < n; ++i) {
        int c = compare(a->kids[i], b->kids[i]);
        if (c != 0) return c;
    }
    if (a->kids.size() != b->kids.size()) return a->kids.size() < b->kids.size() ? -1 : 1;
    return 0;
}

inline bool equal(const Expr& a, const Expr& b) { return compare(a, b) == 0; }

struct ExprLess {
    bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};

// ---------------------------------------------------------------------------
// constructors

inline Expr num(Rat r) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Num;
    n->value = std::move(r);
    return n;
}
inline Expr num(long v) { return num(Rat(v)); }
inline Expr num(long p, long q) { return num(Rat(p, q)); }

inline const Expr& zero() {
    static Expr e = num(0);
    return e;
}
inline const Expr& one() {
    static Expr e = num(1);
    return e;
}

inline Expr sym(std::string name) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Sym;
    n->name = std::move(name);
    return n;
}

inline Expr par(std::string name) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Par;
    n->name = std::move(name);
    return n;
}

inline bool is_num(const Expr& e) { return e->kind == Kind::Num; }
inline bool is_num(const Expr& e, const Rat& v) { return e->kind == Kind::Num && e->value == v; }
inline bool is_zero_expr(const Expr& e) { return is_num(e, Rat(0)); }
inline bool is_one_expr(const Expr& e) { return is_num(e, Rat(1)); }

Expr add(std::vector<Expr> terms);
Expr mul(std::vector<Expr> factors);
Expr pow(const Expr& base, const Expr& expo);
Expr elem(ElemFn fn, const Expr& arg);

inline Expr add(const Expr& a, const Expr& b) { return add(std::vector<Expr>{a, b}); }
inline Expr mul(const Expr& a, const Expr& b) { return mul(std::vector<Expr>{a, b}); }
inline Expr sub(const Expr& a, const Expr& b) { return add(std::vector<Expr>{a, mul(num(-1), b)}); }
inline Expr neg(const Expr& a) { return mul(num(-1), a); }
inline Expr div(const Expr& a, const Expr& b) { return mul(a, pow(b, num(-1))); }
inline Expr pow(const Expr& base, long e) { return pow(base, num(e)); }

inline Expr fun(std::string name, const Expr& arg, int order = 0) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Fun;
    n->name = std::move(name);
    n->order = order;
    n->kids = {arg};
    return n;
}

inline Expr integral(const Expr& integrand, std::string var) {
    if (is_zero_expr(integrand)) return zero();
    auto n = std::make_shared<Node>();
    n->kind = Kind::Int;
    n->var = std::move(var);
    n->kids = {integrand};
    return n;
}

namespace detail {

// any use of the name, free or as a binder
inline bool mentions_name(const Expr& e, const std::string& n) {
    if (e->kind == Kind::Sym && e->name == n) return true;
    if ((e->kind == Kind::Int || e->kind == Kind::IntTo) && e->var == n) return true;
    for (auto& k : e->kids)
        if (mentions_name(k, n)) return true;
    return false;
}

Expr rename_bound(const Expr& e, const std::string& from, const std::string& to);

}  // namespace detail

// Fixed-anchor semantics: IntTo(h, z, u) denotes the integral of h dz from 1 to u,
// so an upper bound of 1 collapses to 0. The dummy is alpha-renamed to the first
// of z, z1, z2, ... not otherwise used, so equal integrals compare equal.
inline Expr integral_to(const Expr& integrand, std::string dummy, const Expr& upper) {
    if (is_zero_expr(integrand)) return zero();
    if (is_one_expr(upper)) return zero();
    Expr h = integrand;
    for (int i = 0;; ++i) {
        std::string cand = i == 0 ? std::string("z") : "z" + std::to_string(i);
        if (cand == dummy) break;
        if (!detail::mentions_name(integrand, cand)) {
            h = detail::rename_bound(integrand, dummy, cand);
            dummy = cand;
            break;
        }
    }
    auto n = std::make_shared<Node>();
    n->kind = Kind::IntTo;
    n->var = std::move(dummy);
    n->kids = {h, upper};
    return n;
}

// split a term into (rational coefficient, non-constant remainder); remainder
// nullptr means the term is a pure constant.
inline std::pair<Rat, Expr> coeff_split(const Expr& e) {
    if (e->kind == Kind::Num) return {e->value, nullptr};
    if (e->kind == Kind::Prod && !e->kids.empty() && e->kids[0]->kind == Kind::Num) {
        Rat c = e->kids[0]->value;
        if (e->kids.size() == 2) return {c, e->kids[1]};
        auto n = std::make_shared<Node>();
        n->kind = Kind::Prod;
        n->kids.assign(e->kids.begin() + 1, e->kids.end());
        return {c, n};
    }
    return {Rat(1), e};
}

inline Expr add(std::vector<Expr> terms) {
    Rat constant = 0;
    std::map<Expr, Rat, ExprLess> acc;
    std::vector<Expr> stack(terms.rbegin(), terms.rend());
    while (!stack.empty()) {
        Expr t = stack.back();
        stack.pop_back();
        if (t->kind == Kind::Sum) {
            for (auto it = t->kids.rbegin(); it != t->kids.rend(); ++it) stack.push_back(*it);
            continue;
        }
        auto [c, rest] = coeff_split(t);
        if (!rest) {
            constant += c;
            continue;
        }
        acc[rest] += c;
    }
    std::vector<Expr> out;
    if (constant != 0) out.push_back(num(constant));
    for (auto& [rest, c] : acc) {
        if (c == 0) continue;
        if (c == 1) out.push_back(rest);
        else out.push_back(mul(num(c), rest));
    }
    if (out.empty()) return zero();
    if (out.size() == 1) return out[0];
    auto n = std::make_shared<Node>();
    n->kind = Kind::Sum;
    n->kids = std::move(out);
    return n;
}

namespace detail {

// rational content of an exponent expression: largest rational c with e = c*e0,
// e0 having integer-primitive coefficients. Returns {c, e0}.
inline std::pair<Rat, Expr> exponent_content(const Expr& e) {
    if (e->kind == Kind::Num) return {e->value, one()};
    std::vector<std::pair<Rat, Expr>> parts;
    if (e->kind == Kind::Sum) {
        for (auto& t : e->kids) parts.push_back(coeff_split(t));
    } else {
        parts.push_back(coeff_split(e));
    }
    Rat c = 0;
    for (auto& [ci, r] : parts) c = rat_gcd(c, ci);
    if (c == 0) return {Rat(1), e};
    // fix sign by the first part for determinism
    if (parts.front().first < 0) c = -c;
    std::vector<Expr> terms;
    for (auto& [ci, r] : parts) {
        Rat q = ci / c;
        terms.push_back(r ? mul(num(q), r) : num(q));
    }
    return {c, add(std::move(terms))};
}

}  // namespace detail

inline Expr pow(const Expr& base, const Expr& expo) {
    if (is_zero_expr(expo)) return one();
    if (is_one_expr(expo)) return base;
    if (is_one_expr(base)) return one();
    if (is_zero_expr(base)) {
        if (expo->kind == Kind::Num && expo->value < 0) throw MathError("division by zero: 0^negative");
        return zero();
    }
    // numeric folding
    if (base->kind == Kind::Num && expo->kind == Kind::Num) {
        if (auto r = exact_rat_pow(base->value, expo->value)) return num(*r);
        // partial extraction of perfect power content from small integers
        if (!is_integer(expo->value)) {
            BigInt q = rat_den(expo->value);
            if (q <= 8 && base->value > 0) {
                auto extract = [&](BigInt n) -> std::pair<BigInt, BigInt> {
                    // n = s^q * m, returns (s, m); trial division for small n
                    BigInt s = 1, m = 1, rem = n;
                    for (BigInt p = 2; p * p <= rem && p < 100000; ++p) {
                        int cnt = 0;
                        while (rem % p == 0) { rem /= p; ++cnt; }
                        int sq = cnt / static_cast<int>(q), mr = cnt % static_cast<int>(q);
                        s *= big_pow(p, static_cast<unsigned long>(sq));
                        m *= big_pow(p, static_cast<unsigned long>(mr));
                    }
                    m *= rem;
                    return {s, m};
                };
                auto [sn, mn] = extract(rat_num(base->value));
                auto [sd, md] = extract(rat_den(base->value));
                if (sn != 1 || sd != 1) {
                    Rat outer(sn, sd), inner(mn, md);
                    Expr rest = inner == 1 ? one() : pow(num(inner), expo);
                    return mul(pow(num(outer), num(Rat(rat_num(expo->value)))), rest);
                }
            }
        }
    }
    // (b1^e1)^e2 folding when safe (e1 rational, or e2 integer)
    if (base->kind == Kind::Pow) {
        const Expr& b1 = base->kids[0];
        const Expr& e1 = base->kids[1];
        if (e1->kind == Kind::Num || (expo->kind == Kind::Num && is_integer(expo->value)))
            return pow(b1, mul(e1, expo));
    }
    // exp(t)^e -> exp(t*e)
    if (base->kind == Kind::Elem && base->fn == ElemFn::Exp) return elem(ElemFn::Exp, mul(base->kids[0], expo));
    // distribute over products (formal: generic/positive domain)
    if (base->kind == Kind::Prod) {
        std::vector<Expr> fs;
        fs.reserve(base->kids.size());
        for (auto& f : base->kids) fs.push_back(pow(f, expo));
        return mul(std::move(fs));
    }
    // The split rules below must not route through mul(): mul() recombines
    // same-base exponents and would call straight back into pow().
    auto raw_prod = [](Expr a, Expr b) -> Expr {
        if (a->kind == Kind::Num && b->kind == Kind::Num) return num(a->value * b->value);
        auto n = std::make_shared<Node>();
        n->kind = Kind::Prod;
        std::vector<Expr> ks;
        auto push = [&](const Expr& e) {
            if (e->kind == Kind::Prod) ks.insert(ks.end(), e->kids.begin(), e->kids.end());
            else ks.push_back(e);
        };
        push(a);
        push(b);
        std::sort(ks.begin(), ks.end(), ExprLess{});
        n->kids = std::move(ks);
        return n;
    };
    // split a rational addend out of the exponent: b^(a+r) -> b^a * b^r
    if (expo->kind == Kind::Sum) {
        std::vector<Expr> symterms;
        Rat r = 0;
        for (auto& t : expo->kids) {
            if (t->kind == Kind::Num) r += t->value;
            else symterms.push_back(t);
        }
        if (r != 0 && !symterms.empty())
            return raw_prod(pow(base, add(std::move(symterms))), pow(base, num(r)));
    }
    // split the integer part of a rational non-integer exponent
    if (expo->kind == Kind::Num && !is_integer(expo->value)) {
        BigInt fl = rat_num(expo->value) / rat_den(expo->value);
        if (rat_num(expo->value) < 0 && rat_num(expo->value) % rat_den(expo->value) != 0) fl -= 1;
        if (fl != 0) {
            Rat frac = expo->value - Rat(fl);
            return raw_prod(pow(base, num(Rat(fl))), pow(base, num(frac)));
        }
    }
    auto n = std::make_shared<Node>();
    n->kind = Kind::Pow;
    n->kids = {base, expo};
    return n;
}

inline Expr mul(std::vector<Expr> factors) {
    Rat constant = 1;
    Rat expnum = 0;  // sum of rational exp() arguments, merged into one factor
    std::map<Expr, std::vector<Expr>, ExprLess> bases;  // base -> exponents
    std::vector<Expr> stack(factors.rbegin(), factors.rend());
    while (!stack.empty()) {
        Expr f = stack.back();
        stack.pop_back();
        if (f->kind == Kind::Prod) {
            for (auto it = f->kids.rbegin(); it != f->kids.rend(); ++it) stack.push_back(*it);
            continue;
        }
        if (f->kind == Kind::Num) {
            if (f->value == 0) return zero();
            constant *= f->value;
            continue;
        }
        if (f->kind == Kind::Pow) {
            bases[f->kids[0]].push_back(f->kids[1]);
            continue;
        }
        if (f->kind == Kind::Elem && f->fn == ElemFn::Exp && f->kids[0]->kind == Kind::Num) {
            expnum += f->kids[0]->value;
            continue;
        }
        bases[f].push_back(one());
    }
    std::vector<Expr> out;
    auto emit = [&](const Expr& e, auto&& emit_ref) -> void {
        // fold results of pow()/elem() back in without re-combining
        if (e->kind == Kind::Num) {
            if (e->value == 0) constant = 0;
            else constant *= e->value;
        } else if (e->kind == Kind::Prod) {
            for (auto& k : e->kids) emit_ref(k, emit_ref);
        } else {
            out.push_back(e);
        }
    };
    for (auto& [b, exps] : bases) {
        Expr e = exps.size() == 1 ? exps[0] : add(exps);
        emit(pow(b, e), emit);
    }
    if (expnum != 0) out.push_back(elem(ElemFn::Exp, num(expnum)));
    if (constant == 0) return zero();
    std::sort(out.begin(), out.end(), ExprLess{});
    if (out.empty()) return num(constant);
    if (constant != 1) out.insert(out.begin(), num(constant));
    if (out.size() == 1) return out[0];
    auto n = std::make_shared<Node>();
    n->kind = Kind::Prod;
    n->kids = std::move(out);
    return n;
}

inline Expr elem(ElemFn fn, const Expr& arg) {
    switch (fn) {
        case ElemFn::Exp: {
            if (is_zero_expr(arg)) return one();
            if (arg->kind == Kind::Elem && arg->fn == ElemFn::Ln) return arg->kids[0];
            if (arg->kind == Kind::Sum) {
                std::vector<Expr> fs;
                for (auto& t : arg->kids) fs.push_back(elem(ElemFn::Exp, t));
                return mul(std::move(fs));
            }
            // exp(c * ln(u) * rest) -> u^(c*rest)
            if (arg->kind == Kind::Prod) {
                for (size_t i = 0; i < arg->kids.size(); ++i) {
                    const Expr& f = arg->kids[i];
                    if (f->kind == Kind::Elem && f->fn == ElemFn::Ln) {
                        std::vector<Expr> rest;
                        for (size_t j = 0; j < arg->kids.size(); ++j)
                            if (j != i) rest.push_back(arg->kids[j]);
                        return pow(f->kids[0], mul(std::move(rest)));
                    }
                }
            }
            break;
        }
        case ElemFn::Ln: {
            if (is_one_expr(arg)) return zero();
            if (arg->kind == Kind::Elem && arg->fn == ElemFn::Exp) return arg->kids[0];
            // formal domain (positive/generic arguments): distribute over pow/prod
            if (arg->kind == Kind::Pow) return mul(arg->kids[1], elem(ElemFn::Ln, arg->kids[0]));
            if (arg->kind == Kind::Prod) {
                std::vector<Expr> ts;
                for (auto& f : arg->kids) ts.push_back(elem(ElemFn::Ln, f));
                return add(std::move(ts));
            }
            break;
        }
        case ElemFn::Sin:
        case ElemFn::Tan:
        case ElemFn::Arctan:
            if (is_zero_expr(arg)) return zero();
            break;
        case ElemFn::Cos:
            if (is_zero_expr(arg)) return one();
            break;
    }
    auto n = std::make_shared<Node>();
    n->kind = Kind::Elem;
    n->fn = fn;
    n->kids = {arg};
    return n;
}

namespace detail {

// rename a bound symbol; `to` must not be mentioned anywhere in e
inline Expr rename_bound(const Expr& e, const std::string& from, const std::string& to) {
    switch (e->kind) {
        case Kind::Num:
        case Kind::Par:
            return e;
        case Kind::Sym:
            return e->name == from ? sym(to) : e;
        case Kind::Sum: {
            std::vector<Expr> ks;
            for (auto& k : e->kids) ks.push_back(rename_bound(k, from, to));
            return add(std::move(ks));
        }
        case Kind::Prod: {
            std::vector<Expr> ks;
            for (auto& k : e->kids) ks.push_back(rename_bound(k, from, to));
            return mul(std::move(ks));
        }
        case Kind::Pow:
            return pow(rename_bound(e->kids[0], from, to), rename_bound(e->kids[1], from, to));
        case Kind::Elem:
            return elem(e->fn, rename_bound(e->kids[0], from, to));
        case Kind::Fun:
            return fun(e->name, rename_bound(e->kids[0], from, to), e->order);
        case Kind::Int:
            if (e->var == from) return e;  // shadowed
            return integral(rename_bound(e->kids[0], from, to), e->var);
        case Kind::IntTo: {
            Expr up = rename_bound(e->kids[1], from, to);
            if (e->var == from) return integral_to(e->kids[0], e->var, up);
            return integral_to(rename_bound(e->kids[0], from, to), e->var, up);
        }
    }
    throw MathError("unreachable");
}

}  // namespace detail

inline Expr sqrt_expr(const Expr& a) { return pow(a, num(1, 2)); }

// ---------------------------------------------------------------------------
// queries

inline bool contains_symbol(const Expr& e, const std::string& name) {
    switch (e->kind) {
        case Kind::Num: return false;
        case Kind::Sym:
        case Kind::Par: return e->name == name;
        case Kind::Int:
            // bound occurrences aside, Int(h, v) depends on v as evaluation point
            if (e->var == name) return true;
            return contains_symbol(e->kids[0], name);
        case Kind::IntTo: {
            if (contains_symbol(e->kids[1], name)) return true;
            if (e->var == name) return false;  // dummy shadows
            return contains_symbol(e->kids[0], name);
        }
        default:
            for (auto& k : e->kids)
                if (contains_symbol(k, name)) return true;
            return false;
    }
}

struct FreeNames {
    std::set<std::string> syms;
    std::set<std::string> pars;
    std::set<std::string> funs;
};

inline void collect_free(const Expr& e, FreeNames& out, std::set<std::string> bound = {}) {
    switch (e->kind) {
        case Kind::Num: return;
        case Kind::Sym:
            if (!bound.count(e->name)) out.syms.insert(e->name);
            return;
        case Kind::Par:
            out.pars.insert(e->name);
            return;
        case Kind::Fun:
            out.funs.insert(e->name);
            collect_free(e->kids[0], out, bound);
            return;
        case Kind::Int:
            if (!bound.count(e->var)) out.syms.insert(e->var);
            collect_free(e->kids[0], out, bound);  // integration var doubles as eval point
            return;
        case Kind::IntTo: {
            collect_free(e->kids[1], out, bound);
            auto b2 = bound;
            b2.insert(e->var);
            collect_free(e->kids[0], out, b2);
            return;
        }
        default:
            for (auto& k : e->kids) collect_free(k, out, bound);
            return;
    }
}

inline FreeNames free_names(const Expr& e) {
    FreeNames f;
    collect_free(e, f);
    return f;
}

// ---------------------------------------------------------------------------
// rendering (grammar-compatible; round-trips through parse on canonical forms)

namespace detail {

// precedence levels: 0 sum, 1 product, 2 unary, 3 power, 4 atom
inline void render_impl(const Expr& e, std::string& s, int parent_prec);

inline void render_paren(const Expr& e, std::string& s, int prec, int parent_prec) {
    if (prec < parent_prec) {
        s += '(';
        render_impl(e, s, 0);
        s += ')';
    } else {
        render_impl(e, s, prec);
    }
}

inline void render_impl(const Expr& e, std::string& s, int parent_prec) {
    switch (e->kind) {
        case Kind::Num: {
            bool needs = (e->value < 0 && parent_prec > 0) || (!is_integer(e->value) && parent_prec >= 3);
            if (needs) s += '(';
            s += rat_to_string(e->value);
            if (needs) s += ')';
            return;
        }
        case Kind::Sym:
        case Kind::Par:
            s += e->name;
            return;
        case Kind::Sum: {
            bool needs = parent_prec > 0;
            if (needs) s += '(';
            bool first = true;
            for (auto& t : e->kids) {
                auto [c, rest] = coeff_split(t);
                if (!first) s += c < 0 ? " - " : " + ";
                else if (c < 0) s += '-';
                Rat cc = (first || c >= 0) ? c : -c;
                if (first && c < 0) cc = -c;
                if (!rest) {
                    s += rat_to_string(cc);
                } else if (cc == 1) {
                    render_paren(rest, s, rest->kind == Kind::Prod ? 1 : 3, 1);
                } else {
                    Expr scaled = mul(num(cc), rest);
                    render_paren(scaled, s, 1, 1);
                }
                first = false;
            }
            if (needs) s += ')';
            return;
        }
        case Kind::Prod: {
            // split into numerator/denominator factors by sign of rational exponents
            std::vector<Expr> nums, dens;
            Rat c = 1;
            for (auto& f : e->kids) {
                if (f->kind == Kind::Num) {
                    c = f->value;
                    continue;
                }
                if (f->kind == Kind::Pow && f->kids[1]->kind == Kind::Num && f->kids[1]->value < 0) {
                    Rat ne = -f->kids[1]->value;
                    dens.push_back(ne == 1 ? f->kids[0] : pow(f->kids[0], num(ne)));
                } else {
                    nums.push_back(f);
                }
            }
            bool needs = parent_prec > 1;
            std::string body;
            bool firstn = true;
            if (c != 1 || nums.empty()) {
                if (c == -1 && !nums.empty()) {
                    body += '-';
                } else {
                    if (!is_integer(c) && !dens.empty()) {
                        body += '(';
                        body += rat_to_string(c);
                        body += ')';
                    } else {
                        bool np = c < 0;
                        if (np) body += '(';
                        body += rat_to_string(c);
                        if (np) body += ')';
                    }
                    firstn = false;
                }
            }
            for (auto& f : nums) {
                if (!firstn) body += '*';
                render_paren(f, body, 3, 2);
                firstn = false;
            }
            if (!dens.empty()) {
                body += '/';
                if (dens.size() > 1) {
                    body += '(';
                    bool fd = true;
                    for (auto& f : dens) {
                        if (!fd) body += '*';
                        render_paren(f, body, 3, 2);
                        fd = false;
                    }
                    body += ')';
                } else {
                    render_paren(dens[0], body, 4, 4);
                }
            }
            bool neg_lead = !body.empty() && body[0] == '-';
            if (needs || (neg_lead && parent_prec > 0)) {
                s += '(';
                s += body;
                s += ')';
            } else {
                s += body;
            }
            return;
        }
        case Kind::Pow: {
            bool needs = parent_prec > 3;
            if (needs) s += '(';
            render_paren(e->kids[0], s, 4, 4);
            s += '^';
            render_paren(e->kids[1], s, 4, 4);
            if (needs) s += ')';
            return;
        }
        case Kind::Elem:
            s += elem_name(e->fn);
            s += '(';
            render_impl(e->kids[0], s, 0);
            s += ')';
            return;
        case Kind::Fun:
            s += e->name;
            for (int i = 0; i < e->order; ++i) s += '\'';
            s += '(';
            render_impl(e->kids[0], s, 0);
            s += ')';
            return;
        case Kind::Int:
            s += "Int(";
            render_impl(e->kids[0], s, 0);
            s += ", ";
            s += e->var;
            s += ')';
            return;
        case Kind::IntTo:
            s += "IntTo(";
            render_impl(e->kids[0], s, 0);
            s += ", ";
            s += e->var;
            s += ", ";
            render_impl(e->kids[1], s, 0);
            s += ')';
            return;
    }
}

}  // namespace detail

inline std::string render(const Expr& e) {
    std::string s;
    detail::render_impl(e, s, 0);
    return s;
}

}  // namespace symline
