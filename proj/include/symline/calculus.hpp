#pragma once

// Differentiation and substitution. Int(h, v) is the antiderivative of h in v
// anchored at v = 1; IntTo(h, z, u) is the same object with the upper limit
// substituted, so the two carry exact derivative and substitution rules.

#include "symline/expr.hpp"

#include <string>

namespace symline {

inline Expr substitute(const Expr& e, const std::string& name, const Expr& replacement);

namespace detail {

inline std::string fresh_dummy(std::initializer_list<Expr> avoid, const std::string& base = "z") {
    auto used = [&](const std::string& n) {
        for (auto& e : avoid)
            if (e && contains_symbol(e, n)) return true;
        return false;
    };
    if (!used(base)) return base;
    for (int i = 1;; ++i) {
        std::string n = base + std::to_string(i);
        if (!used(n)) return n;
    }
}

}  // namespace detail

inline Expr diff(const Expr& e, const std::string& var) {
    switch (e->kind) {
        case Kind::Num:
        case Kind::Par:
            return zero();
        case Kind::Sym:
            return e->name == var ? one() : zero();
        case Kind::Sum: {
            std::vector<Expr> ts;
            for (auto& k : e->kids) ts.push_back(diff(k, var));
            return add(std::move(ts));
        }
        case Kind::Prod: {
            std::vector<Expr> ts;
            for (size_t i = 0; i < e->kids.size(); ++i) {
                Expr d = diff(e->kids[i], var);
                if (is_zero_expr(d)) continue;
                std::vector<Expr> fs;
                fs.push_back(d);
                for (size_t j = 0; j < e->kids.size(); ++j)
                    if (j != i) fs.push_back(e->kids[j]);
                ts.push_back(mul(std::move(fs)));
            }
            return add(std::move(ts));
        }
        case Kind::Pow: {
            const Expr& b = e->kids[0];
            const Expr& x = e->kids[1];
            Expr db = diff(b, var), dx = diff(x, var);
            std::vector<Expr> ts;
            if (!is_zero_expr(db)) ts.push_back(mul({x, pow(b, sub(x, one())), db}));
            if (!is_zero_expr(dx)) ts.push_back(mul({e, elem(ElemFn::Ln, b), dx}));
            return add(std::move(ts));
        }
        case Kind::Elem: {
            const Expr& a = e->kids[0];
            Expr da = diff(a, var);
            if (is_zero_expr(da)) return zero();
            Expr outer;
            switch (e->fn) {
                case ElemFn::Exp: outer = e; break;
                case ElemFn::Ln: outer = pow(a, num(-1)); break;
                case ElemFn::Sin: outer = elem(ElemFn::Cos, a); break;
                case ElemFn::Cos: outer = neg(elem(ElemFn::Sin, a)); break;
                case ElemFn::Tan: outer = add(one(), pow(elem(ElemFn::Tan, a), num(2))); break;
                case ElemFn::Arctan: outer = pow(add(one(), pow(a, num(2))), num(-1)); break;
            }
            return mul(outer, da);
        }
        case Kind::Fun: {
            Expr da = diff(e->kids[0], var);
            if (is_zero_expr(da)) return zero();
            return mul(fun(e->name, e->kids[0], e->order + 1), da);
        }
        case Kind::Int: {
            if (e->var == var) return e->kids[0];
            Expr dh = diff(e->kids[0], var);
            if (is_zero_expr(dh)) return zero();
            return integral(dh, e->var);
        }
        case Kind::IntTo: {
            const Expr& h = e->kids[0];
            const Expr& u = e->kids[1];
            Expr du = diff(u, var);
            std::vector<Expr> ts;
            if (!is_zero_expr(du)) ts.push_back(mul(substitute(h, e->var, u), du));
            Expr dh = diff(h, var);  // var != dummy: the dummy is never a free name
            if (!is_zero_expr(dh)) ts.push_back(integral_to(dh, e->var, u));
            return add(std::move(ts));
        }
    }
    throw MathError("unreachable");
}

inline Expr diff(const Expr& e, const std::string& var, int times) {
    Expr r = e;
    for (int i = 0; i < times; ++i) r = diff(r, var);
    return r;
}

inline Expr substitute(const Expr& e, const std::string& name, const Expr& replacement) {
    switch (e->kind) {
        case Kind::Num:
            return e;
        case Kind::Sym:
        case Kind::Par:
            return e->name == name ? replacement : e;
        case Kind::Sum: {
            std::vector<Expr> ks;
            for (auto& k : e->kids) ks.push_back(substitute(k, name, replacement));
            return add(std::move(ks));
        }
        case Kind::Prod: {
            std::vector<Expr> ks;
            for (auto& k : e->kids) ks.push_back(substitute(k, name, replacement));
            return mul(std::move(ks));
        }
        case Kind::Pow:
            return pow(substitute(e->kids[0], name, replacement), substitute(e->kids[1], name, replacement));
        case Kind::Elem:
            return elem(e->fn, substitute(e->kids[0], name, replacement));
        case Kind::Fun:
            return fun(e->name, substitute(e->kids[0], name, replacement), e->order);
        case Kind::Int: {
            const Expr& h = e->kids[0];
            if (e->var == name) {
                // the integration variable becomes a definite upper limit
                std::string z = detail::fresh_dummy({h, replacement});
                return integral_to(substitute(h, e->var, sym(z)), z, replacement);
            }
            if (contains_symbol(replacement, e->var)) {
                // avoid capturing the integration variable: move to IntTo form
                std::string z = detail::fresh_dummy({h, replacement});
                Expr h2 = substitute(substitute(h, e->var, sym(z)), name, replacement);
                return integral_to(h2, z, sym(e->var));
            }
            return integral(substitute(h, name, replacement), e->var);
        }
        case Kind::IntTo: {
            const Expr& h = e->kids[0];
            Expr u = substitute(e->kids[1], name, replacement);
            if (e->var == name) return integral_to(h, e->var, u);
            if (contains_symbol(replacement, e->var)) {
                std::string z = detail::fresh_dummy({h, replacement, u}, e->var);
                Expr h2 = substitute(substitute(h, e->var, sym(z)), name, replacement);
                return integral_to(h2, z, u);
            }
            return integral_to(substitute(h, name, replacement), e->var, u);
        }
    }
    throw MathError("unreachable");
}

// structural replacement of every subtree equal to target
inline Expr replace_subexpr(const Expr& e, const Expr& target, const Expr& replacement) {
    if (equal(e, target)) return replacement;
    switch (e->kind) {
        case Kind::Num:
        case Kind::Sym:
        case Kind::Par:
            return e;
        case Kind::Sum: {
            std::vector<Expr> ks;
            for (auto& k : e->kids) ks.push_back(replace_subexpr(k, target, replacement));
            return add(std::move(ks));
        }
        case Kind::Prod: {
            std::vector<Expr> ks;
            for (auto& k : e->kids) ks.push_back(replace_subexpr(k, target, replacement));
            return mul(std::move(ks));
        }
        case Kind::Pow:
            return pow(replace_subexpr(e->kids[0], target, replacement),
                       replace_subexpr(e->kids[1], target, replacement));
        case Kind::Elem:
            return elem(e->fn, replace_subexpr(e->kids[0], target, replacement));
        case Kind::Fun:
            return fun(e->name, replace_subexpr(e->kids[0], target, replacement), e->order);
        case Kind::Int:
            return integral(replace_subexpr(e->kids[0], target, replacement), e->var);
        case Kind::IntTo:
            return integral_to(replace_subexpr(e->kids[0], target, replacement), e->var,
                               replace_subexpr(e->kids[1], target, replacement));
    }
    throw MathError("unreachable");
}

}  // namespace symline
