#pragma once

// Verification and quadrature for a linear symmetry of y' = phi(x, y).
// A symmetry [xi, eta] yields the integrating factor mu = 1/(eta - xi*phi)
// and an implicit solution Int(-mu, y) + C(x) = C1 whose total derivative
// along solutions vanishes.

#include "symline/integrate.hpp"
#include "symline/ode.hpp"

#include <optional>
#include <string>

namespace symline {

struct SymmetryDegenerate : MathError {
    explicit SymmetryDegenerate(const std::string& what) : MathError(what) {}
};

struct SolutionCheckFailed : MathError {
    explicit SolutionCheckFailed(const std::string& what) : MathError(what) {}
};

// eta_x + (eta_y - xi') phi - xi phi_x - eta phi_y
inline Expr determining_residual(const Expr& phi, const LinearSymmetry& s) {
    Expr t1 = diff(s.eta, "x");
    Expr t2 = mul(sub(diff(s.eta, "y"), diff(s.xi, "x")), phi);
    Expr t3 = mul(s.xi, diff(phi, "x"));
    Expr t4 = mul(s.eta, diff(phi, "y"));
    return sub(add(t1, t2), add(t3, t4));
}

// true iff [xi, eta] is a genuine symmetry: not identically zero and the
// determining equation holds
inline bool verify_symmetry(const Expr& phi, const LinearSymmetry& s, Session& session) {
    if (is_zero(s.xi, session).zero && is_zero(s.eta, session).zero) return false;
    return is_zero(determining_residual(phi, s), session).zero;
}

inline Expr integrating_factor(const Expr& phi, const LinearSymmetry& s, Session& session) {
    Expr den = sub(s.eta, mul(s.xi, phi));
    if (is_zero(den, session).zero)
        throw SymmetryDegenerate("eta - xi*phi vanishes: the symmetry is tangent to the solution curves");
    return ratnormal(pow(den, num(-1)));
}

struct ImplicitSolution {
    Expr lhs;  // implicit solution lhs(x, y) = C1
    bool verified = false;
};

// d/dx lhs + phi * d/dy lhs == 0
inline bool check_solution(const Expr& phi, const Expr& lhs, Session& session) {
    Expr total = add(diff(lhs, "x"), mul(diff(lhs, "y"), phi));
    return is_zero(total, session).zero;
}

// Quadrature: lhs = G1 + C with d/dy G1 = -mu and C' = mu*phi - d/dx G1.
// A hint u = p y + q routes the y-quadrature through u so the inner
// integral matches the separated form of the reduced equation.
inline ImplicitSolution implicit_solution(const Expr& phi, const LinearSymmetry& s,
                                          Session& session,
                                          const std::optional<LinearHint>& hint = std::nullopt) {
    Expr mu = integrating_factor(phi, s, session);
    Expr negmu = neg(mu);
    Expr G1;
    bool routed = false;
    if (hint) {
        Expr U = add(mul(hint->p, sym("y")), hint->q);
        std::string z = detail::fresh_dummy({phi, s.xi, s.eta, hint->p, hint->q});
        Expr yz = div(sub(sym(z), hint->q), hint->p);
        Expr hz = ratnormal(div(substitute(negmu, "y", yz), hint->p));
        hz = scrub_symbol(hz, "x", session);
        if (!contains_symbol(hz, "x")) {
            G1 = substitute(integrate(hz, z, session, "solve.G1"), z, U);
            routed = true;
        }
    }
    if (!routed) G1 = integrate(negmu, "y", session, "solve.G1");
    Expr rem = ratnormal(sub(mul(mu, phi), diff(G1, "x")));
    rem = scrub_symbol(rem, "y", session);
    Expr C = integrate(rem, "x", session, "solve.C");
    ImplicitSolution out;
    out.lhs = add(G1, C);
    if (!check_solution(phi, out.lhs, session))
        throw SolutionCheckFailed("total derivative of the implicit solution does not vanish");
    out.verified = true;
    return out;
}

}  // namespace symline
