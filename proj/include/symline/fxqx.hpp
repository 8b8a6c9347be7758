#pragma once

// Detection of symmetries [xi = F(x), eta = Q(x)] for y' = phi(x, y).
// With K = phi_y/phi_yy the problem splits on K_y: when K_y != 0 the ratio
// Upsilon = K_x/K_y must equal -Q/F and the integrand
// W = (Upsilon*phi_y - Upsilon_x - phi_x)/(phi + Upsilon) must be free of y,
// giving F = exp(Int W dx) and Q = -Upsilon*F. When K_y = 0 the ODE must be
// A(x) + B(x)*exp(y/kappa) and F, Q follow from A and B directly.

#include "symline/integrate.hpp"
#include "symline/ode.hpp"

#include <cmath>
#include <optional>
#include <string>

namespace symline {

struct FxQxSymmetry {
    Expr F;
    Expr Q;
};

enum class FxQxTag {
    Found,               // proper [F, Q] with both nonzero
    Separable,           // Q degenerates to 0; symmetry [F, 0] still attached
    DegenerateLinear,    // phi_yy == 0
    DivisionDegenerate,  // phi + Upsilon == 0
    Absent,              // a named condition failed
};

struct FxQxResult {
    FxQxTag tag = FxQxTag::Absent;
    std::optional<FxQxSymmetry> sym;
    std::string detail;
};

// normalize(phi_y / phi_yy); nullopt when phi_yy == 0 (first order linear)
inline std::optional<Expr> compute_K(const Expr& phi, Session& session) {
    Expr phiyy = diff(phi, "y", 2);
    if (is_zero(phiyy, session).zero) return std::nullopt;
    return ratnormal(div(diff(phi, "y"), phiyy));
}

inline FxQxResult detect_Ky_nonzero(const Expr& phi, const Expr& K, Session& session) {
    FxQxResult r;
    Expr Ky = diff(K, "y");
    Expr upsilon = ratnormal(div(diff(K, "x"), Ky));
    if (!is_free_of(upsilon, "y", session)) {
        r.detail = "Upsilon = K_x/K_y depends on y";
        return r;
    }
    upsilon = scrub_symbol(upsilon, "y", session);
    Expr den = add(phi, upsilon);
    if (is_zero(den, session).zero) {
        r.tag = FxQxTag::DivisionDegenerate;
        r.detail = "phi + Upsilon vanishes identically";
        return r;
    }
    Expr W = ratnormal(div(sub(mul(upsilon, diff(phi, "y")), add(diff(upsilon, "x"), diff(phi, "x"))), den));
    if (!is_free_of(W, "y", session)) {
        r.detail = is_zero(upsilon, session).zero
                       ? "separability test d/dy(phi_x/phi) failed"
                       : "integrand (Upsilon*phi_y - Upsilon_x - phi_x)/(phi + Upsilon) depends on y";
        return r;
    }
    W = scrub_symbol(W, "y", session);
    Expr F = elem(ElemFn::Exp, integrate(W, "x", session, "fxqx.F"));
    if (is_zero(upsilon, session).zero) {
        r.tag = FxQxTag::Separable;
        r.sym = FxQxSymmetry{F, zero()};
        return r;
    }
    r.tag = FxQxTag::Found;
    r.sym = FxQxSymmetry{F, ratnormal(neg(mul(upsilon, F)))};
    return r;
}

namespace detail {

// value of a constant expression at one probe point, as a small rational if
// it is within tolerance of one with denominator <= 64
inline std::optional<Expr> constant_value(const Expr& e, Session& session) {
    Expr n = ratnormal(e);
    if (n->kind == Kind::Num) return n;
    FreeNames names = free_names(e);
    for (int probe = 0; probe < session.probe.n_probes * 25; ++probe) {
        Assignment a = make_assignment(names, session.probe.seed, probe, 0);
        CN vc;
        try {
            vc = eval_at(e, a);
        } catch (const EvalError&) {
            continue;
        }
        if (std::fabs(vc.imag()) > 1e-9 * (1.0 + std::fabs(vc.real()))) break;
        double v = vc.real();
        for (long q = 1; q <= 64; ++q) {
            double pq = v * static_cast<double>(q);
            double p = std::round(pq);
            if (std::fabs(pq - p) < 1e-9 * static_cast<double>(q) && std::fabs(p) < 1e15)
                return num(Rat(BigInt(static_cast<long long>(p)), BigInt(q)));
        }
        break;  // one valid point suffices; it is not a small rational
    }
    // keep it symbolic; it is constant in x and y, so evaluating there is safe
    if (contains_symbol(n, "y")) n = substitute(n, "y", one());
    if (contains_symbol(n, "x")) n = substitute(n, "x", one());
    return n;
}

}  // namespace detail

inline FxQxResult detect_Ky_zero(const Expr& phi, const Expr& K, Session& session) {
    FxQxResult r;
    if (!is_zero(diff(K, "x"), session).zero) {
        r.detail = "K = phi_y/phi_yy has K_y = 0 but depends on x";
        return r;
    }
    auto kappa = detail::constant_value(K, session);
    if (!kappa || is_zero_expr(*kappa)) {
        r.detail = "constant kappa = phi_y/phi_yy could not be extracted";
        return r;
    }
    Expr ik = pow(*kappa, num(-1));
    Expr A = ratnormal(sub(phi, mul(*kappa, diff(phi, "y"))));
    if (!is_free_of(A, "y", session)) {
        r.detail = "A = phi - kappa*phi_y depends on y";
        return r;
    }
    A = scrub_symbol(A, "y", session);
    Expr B = ratnormal(mul({*kappa, diff(phi, "y"), elem(ElemFn::Exp, neg(mul(ik, sym("y"))))}));
    if (!is_free_of(B, "y", session)) {
        r.detail = "B = kappa*phi_y*exp(-y/kappa) depends on y";
        return r;
    }
    B = scrub_symbol(B, "y", session);
    Expr residual = sub(phi, add(A, mul(B, elem(ElemFn::Exp, mul(ik, sym("y"))))));
    if (!is_zero(residual, session).zero) {
        r.detail = "phi is not of the form A(x) + B(x)*exp(y/kappa)";
        return r;
    }
    Expr F = div(elem(ElemFn::Exp, neg(integrate(ratnormal(mul(A, ik)), "x", session, "fxqx.KyZero.F"))), B);
    if (is_zero(A, session).zero) {
        r.tag = FxQxTag::Separable;
        r.sym = FxQxSymmetry{F, zero()};
        return r;
    }
    r.tag = FxQxTag::Found;
    r.sym = FxQxSymmetry{F, ratnormal(mul(A, F))};
    return r;
}

inline FxQxResult fxqx_detect(const Expr& phi, Session& session) {
    auto K = compute_K(phi, session);
    if (!K) {
        FxQxResult r;
        r.tag = FxQxTag::DegenerateLinear;
        r.detail = "phi_yy vanishes: first order linear ODE";
        return r;
    }
    if (is_zero(diff(*K, "y"), session).zero) return detect_Ky_zero(phi, *K, session);
    return detect_Ky_nonzero(phi, *K, session);
}

}  // namespace symline
