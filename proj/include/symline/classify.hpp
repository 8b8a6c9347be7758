#pragma once

// Top-level classifier. For y' = phi(x, y) with phi_yyy != 0 the ratio
// A = phi_yy/phi_yyy equals K(p y + q)/p for members of the target class,
// and the shape of A selects the change of variables that maps the ODE to
// one with a symmetry [F(x), Q(x)]:
//   A_y  = 0             y = A u
//   A_yy = 0, A_y != 0   u = ln(A), with A = a1 y + a0
//   A_yy != 0            u = p y + q from I = A_xy/A_yy = I1 y + I0,
//                        p = exp(Int I1 dx), q = Int p I0 dx
// ODEs with phi_yyy = 0 are routed to the Riccati strategy instead.

#include "symline/riccati.hpp"

#include <optional>
#include <string>

namespace symline {

// normalize(phi_yy / phi_yyy); nullopt when phi_yyy == 0 (Riccati territory)
inline std::optional<Expr> compute_A(const Expr& phi, Session& session) {
    Expr p3 = diff(phi, "y", 3);
    if (is_zero(p3, session).zero) return std::nullopt;
    return ratnormal(div(diff(phi, "y", 2), p3));
}

namespace detail {

// transform the ODE through u = U(x, y), detect an [F, Q] symmetry of the
// reduced ODE and pull it back; on failure the branch is NotInClass.
// When the reduced symmetry has Q != 0 the separating variable is shifted
// by r = Int(Q/F, x), which has to be folded into the quadrature hint:
// additively for a linear u = p y + q, and as a factor exp(-r) on A for
// the logarithmic case u = ln(A).
inline bool attach_reduced(Classification& cls, const Expr& phi, const Expr& U,
                           const Expr& inverse, const std::string& kind, Session& session,
                           bool log_case = false) {
    Expr tphi = transformed_phi(phi, U, inverse, session);
    cls.trace.reduced_phi = tphi;
    FxQxResult r = fxqx_detect(tphi, session);
    if (r.tag != FxQxTag::Found && r.tag != FxQxTag::Separable) {
        cls.outcome = Outcome::NotInClass;
        cls.symmetry.reset();
        cls.hint.reset();
        cls.failed_condition = "reduced ODE admits no [F(x), Q(x)] symmetry";
        if (!r.detail.empty()) cls.failed_condition += ": " + r.detail;
        return false;
    }
    cls.reduction.push_back({kind, U, inverse});
    try {
        cls.symmetry = pullback_symmetry(r.sym->F, r.sym->Q, U, session);
    } catch (const PullbackNotLinear& e) {
        cls.outcome = Outcome::NotInClass;
        cls.symmetry.reset();
        cls.hint.reset();
        cls.failed_condition = e.what();
        return false;
    }
    if (r.tag == FxQxTag::Found && cls.hint) {
        Expr shift = integrate(ratnormal(div(r.sym->Q, r.sym->F)), "x", session, "classify.shift");
        if (log_case) {
            Expr damp = elem(ElemFn::Exp, neg(shift));
            cls.hint = LinearHint{mul(cls.hint->p, damp), mul(cls.hint->q, damp)};
        } else {
            cls.hint = LinearHint{cls.hint->p, sub(cls.hint->q, shift)};
        }
    }
    return true;
}

}  // namespace detail

inline Classification find_linear_symmetry_impl(const Expr& phi, Session& session) {
    Classification cls;
    if (is_zero(diff(phi, "y", 2), session).zero) {
        cls.outcome = Outcome::DegenerateLinear;
        cls.case_label = "Linear";
        cls.failed_condition = "phi_yy = 0: first order linear ODE, solvable by quadratures";
        cls.probabilistic = session.any_probabilistic;
        return cls;
    }
    auto A = compute_A(phi, session);
    if (!A) return riccati_strategy(phi, session);

    // a direct [F, Q] symmetry needs no change of variables
    {
        FxQxResult r = fxqx_detect(phi, session);
        if (r.tag == FxQxTag::Found || r.tag == FxQxTag::Separable) {
            cls.outcome = Outcome::FxQxDirect;
            cls.case_label = r.tag == FxQxTag::Separable ? "Separable" : "FxQxDirect";
            cls.symmetry = LinearSymmetry{r.sym->F, r.sym->Q};
            // u = y - Int(Q/F, x) separates the ODE, so route the quadrature
            // through that shift
            if (r.tag == FxQxTag::Found) {
                Expr shift = integrate(ratnormal(div(r.sym->Q, r.sym->F)), "x", session,
                                       "classify.shift");
                cls.hint = LinearHint{one(), neg(shift)};
            }
            finalize_classification(cls, phi, session);
            return cls;
        }
    }

    cls.trace.A = *A;
    bool ok;
    if (is_zero(diff(*A, "y"), session).zero) {
        Expr Ax = scrub_symbol(*A, "y", session);
        cls.outcome = Outcome::CaseAy0;
        cls.case_label = "CaseAy0";
        Expr U = div(sym("y"), Ax);
        Expr inverse = mul(Ax, sym("y"));
        cls.hint = LinearHint{pow(Ax, num(-1)), zero()};
        ok = detail::attach_reduced(cls, phi, U, inverse, "y = A u", session);
    } else if (is_zero(diff(*A, "y", 2), session).zero) {
        auto parts = poly_parts(*A, "y", 1, session);
        if (!parts) {
            cls.outcome = Outcome::NotInClass;
            cls.failed_condition = "A = phi_yy/phi_yyy with A_yy = 0 is not linear in y";
            cls.probabilistic = session.any_probabilistic;
            return cls;
        }
        Expr a0 = ratnormal(scrub_symbol((*parts)[0], "y", session));
        Expr a1 = ratnormal(scrub_symbol((*parts)[1], "y", session));
        cls.outcome = Outcome::CaseAyy0;
        cls.case_label = "CaseAyy0";
        Expr U = elem(ElemFn::Ln, add(mul(a1, sym("y")), a0));
        Expr inverse = div(sub(elem(ElemFn::Exp, sym("y")), a0), a1);
        cls.hint = LinearHint{a1, a0};
        ok = detail::attach_reduced(cls, phi, U, inverse, "u = ln(A)", session, true);
    } else {
        Expr Ay = diff(*A, "y");
        Expr I = ratnormal(div(diff(Ay, "x"), diff(Ay, "y")));
        cls.trace.I = I;
        auto parts = poly_parts(I, "y", 1, session);
        if (!parts) {
            cls.outcome = Outcome::NotInClass;
            cls.failed_condition = "I = A_xy/A_yy is not linear in y";
            cls.probabilistic = session.any_probabilistic;
            return cls;
        }
        Expr I0 = ratnormal(scrub_symbol((*parts)[0], "y", session));
        Expr I1 = ratnormal(scrub_symbol((*parts)[1], "y", session));
        Expr p = elem(ElemFn::Exp, integrate(I1, "x", session, "classify.p"));
        Expr q = integrate(ratnormal(mul(p, I0)), "x", session, "classify.q");
        cls.trace.p = p;
        cls.trace.q = q;
        cls.outcome = Outcome::CaseGeneral;
        cls.case_label = "CaseGeneral";
        Expr U = add(mul(p, sym("y")), q);
        Expr inverse = div(sub(sym("y"), q), p);
        cls.hint = LinearHint{p, q};
        ok = detail::attach_reduced(cls, phi, U, inverse, "u = p y + q", session);
    }
    if (!ok) {
        cls.probabilistic = session.any_probabilistic;
        return cls;
    }
    finalize_classification(cls, phi, session);
    return cls;
}

inline Classification find_linear_symmetry(const Expr& phi, Session& session) {
    detail::work_reset();  // fresh exact-arithmetic meter per classification
    try {
        return find_linear_symmetry_impl(phi, session);
    } catch (const GcdBudgetExceeded&) {
        // pathological coefficient growth; report an honest non-answer
        // rather than stalling
        Classification cls;
        cls.outcome = Outcome::NotInClass;
        cls.failed_condition =
            "exact arithmetic work budget exhausted; membership undecided";
        cls.probabilistic = true;
        session.any_probabilistic = true;
        return cls;
    }
}

}  // namespace symline
