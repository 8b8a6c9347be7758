#pragma once

// Changes of variables u = U(x, y) applied to y' = phi(x, y), pullback of
// symmetries found for the transformed ODE, and the common finalizer that
// verifies a candidate symmetry and attempts the quadrature.

#include "symline/solve.hpp"

#include <string>

namespace symline {

struct PullbackNotLinear : MathError {
    explicit PullbackNotLinear(const std::string& what) : MathError(what) {}
};

// ODE u' = U_x + U_y * phi satisfied by u = U(x, y), rewritten in (x, u)
// with u printed as y; `inverse` gives y in terms of x and the new variable
// (also written as y)
inline Expr transformed_phi(const Expr& phi, const Expr& U, const Expr& inverse, Session& session) {
    (void)session;
    Expr up = add(diff(U, "x"), mul(diff(U, "y"), phi));
    std::string t = detail::fresh_dummy({up, inverse}, "w");
    Expr inv = substitute(inverse, "y", sym(t));
    Expr res = substitute(substitute(up, "y", inv), t, sym("y"));
    try {
        return ratnormal(res);
    } catch (const MathError&) {
        return res;
    }
}

// pull a symmetry [F(x), etahat] of the transformed ODE back through
// u = U(x, y); etahat is written in x and the transformed variable as y
inline LinearSymmetry pullback_symmetry(const Expr& F, const Expr& etahat, const Expr& U,
                                        Session& session) {
    Expr eh = substitute(etahat, "y", U);
    Expr eta = ratnormal(div(sub(eh, mul(F, diff(U, "x"))), diff(U, "y")));
    if (!poly_parts(eta, "y", 1, session))
        throw PullbackNotLinear("pulled-back eta is not linear in y");
    return {F, eta};
}

// verify the attached symmetry against the determining equation, then try
// the quadrature; a symmetry that fails verification is dropped and the
// branch degrades to NotInClass
inline void finalize_classification(Classification& cls, const Expr& phi, Session& session) {
    if (cls.symmetry) {
        if (!verify_symmetry(phi, *cls.symmetry, session)) {
            cls.symmetry.reset();
            cls.solution.reset();
            cls.outcome = Outcome::NotInClass;
            cls.failed_condition = "candidate symmetry failed the determining equation";
            cls.probabilistic = session.any_probabilistic;
            return;
        }
        cls.verified_determining = true;
        if (session.skip_quadrature) {
            cls.probabilistic = session.any_probabilistic;
            return;
        }
        try {
            ImplicitSolution sol = implicit_solution(phi, *cls.symmetry, session, cls.hint);
            cls.solution = sol.lhs;
            cls.verified_solution = sol.verified;
        } catch (const MathError& e) {
            if (!cls.failed_condition.empty()) cls.failed_condition += "; ";
            cls.failed_condition += std::string("quadrature: ") + e.what();
        } catch (const ProbeFailure& e) {
            if (!cls.failed_condition.empty()) cls.failed_condition += "; ";
            cls.failed_condition += std::string("quadrature: ") + e.what();
        }
    }
    cls.probabilistic = session.any_probabilistic;
}

}  // namespace symline
