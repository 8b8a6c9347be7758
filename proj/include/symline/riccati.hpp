#pragma once

// Linear symmetries for Riccati ODEs y' = f2 y^2 + f1 y + f0 (phi_yyy = 0).
// Writing the symmetry as [xi = p/f, eta = -(p' y + q')/f], solvable
// subfamilies arise when two of {f, p, q} coincide:
//   step 1  p' = 0 -> [F(x), Q(x)] (fxqx), or q' = 0 -> Chini's algorithm
//           (constant invariant I = s3^2/s2^3);
//   step 2  f = p via y -> u/f2, and q = p via y -> u - 1, re-entering step 1;
//   step 3  f = q: reconstruct p from the relative invariants s2, s3, s4 and
//           accept when both a and b come out constant.

#include "symline/fxqx.hpp"
#include "symline/transform.hpp"

#include <optional>
#include <string>
#include <vector>

namespace symline {
namespace detail {

struct RiccatiCoeffs {
    Expr f0, f1, f2;
};

// coefficients of phi as a quadratic in y, scrubbed of textual leftovers
inline std::optional<RiccatiCoeffs> extract_coeffs(const Expr& phi, Session& session,
                                                   std::string& err) {
    auto parts = poly_parts(phi, "y", 2, session);
    if (!parts) {
        err = "phi with phi_yyy = 0 is not quadratic in y";
        return std::nullopt;
    }
    RiccatiCoeffs c;
    c.f0 = ratnormal(scrub_symbol((*parts)[0], "y", session));
    c.f1 = ratnormal(scrub_symbol((*parts)[1], "y", session));
    c.f2 = ratnormal(scrub_symbol((*parts)[2], "y", session));
    if (is_zero(c.f2, session).zero) {
        err = "f2 = 0: the ODE is not of Riccati type";
        return std::nullopt;
    }
    return c;
}

inline RiccatiInfo riccati_invariants(const RiccatiCoeffs& c) {
    RiccatiInfo info;
    info.s2 = ratnormal(mul(c.f0, c.f2));
    info.s3 = ratnormal(sub(sub(mul(diff(c.f0, "x"), c.f2), mul(diff(c.f2, "x"), c.f0)),
                            mul({num(2), c.f0, c.f1, c.f2})));
    Expr s2p = diff(info.s2, "x");
    Expr s3p = diff(info.s3, "x");
    info.s4 = ratnormal(div(add(sub(mul({num(2), info.s2, s3p}), mul({num(3), info.s3, s2p})),
                                mul(num(3), pow(info.s3, num(2)))),
                            mul(num(2), info.s2)));
    info.chini = ratnormal(div(pow(info.s3, num(2)), pow(info.s2, num(3))));
    return info;
}

inline Expr sqrt_constant(const Rat& c) {
    if (c > 0) {
        BigInt n = rat_num(c), d = rat_den(c);
        BigInt sn = boost::multiprecision::sqrt(n), sd = boost::multiprecision::sqrt(d);
        if (sn * sn == n && sd * sd == d) return num(Rat(sn, sd));
    }
    return pow(num(c), num(Rat(1, 2)));
}

// sqrt(e) in factored form: when e = c r^2 for a rational function r of the
// kernels and a constant c, returns r * c^(1/2). The principal square root of
// the raw fraction flips sign independently across the real zeros of its
// factors, which blocks downstream cancellation and makes probe values
// inconsistent between the symmetry and expressions derived from it; the
// factored form fixes one branch for the whole expression.
inline Expr sqrt_simplified(const Expr& e) {
    Expr fallback = pow(e, num(Rat(1, 2)));
    try {
        RatForm rf = rat_normalize(e);
        if (rf.value.num.is_zero()) return zero();
        for (auto& k : rf.kernels)
            if (k.has_relation) return fallback;  // fractional powers already present
        Poly P = rf.value.num * rf.value.den;
        Poly S = Poly::constant(P.nvars, 1);
        if (!P.is_constant()) {
            Poly d;
            for (int v = 0; v < P.nvars; ++v) {
                d = poly_derivative(P, v);
                if (!d.is_zero()) break;
            }
            S = poly_gcd(P, d);  // squarefree S recovers sqrt(P/c)
        }
        Poly c = poly_divexact(poly_divexact(P, S), S);
        if (!c.is_constant()) return fallback;
        return mul(sqrt_constant(c.constant_value()),
                   div(rf.poly_to_expr(S), rf.poly_to_expr(rf.value.den)));
    } catch (const MathError&) {
        return fallback;
    }
}

// a symmetry in the variables of the ODE handed in (eta written with the
// dependent variable as y)
struct Step1Hit {
    Expr xi;
    Expr eta;
    std::string method;  // "fxqx", "separable" or "chini"
    std::optional<LinearHint> hint;  // separating variable u = p y + q
};

// step 1: [F(x), Q(x)] detection, then Chini's constant-invariant test
inline std::optional<Step1Hit> riccati_step1(const Expr& phi, Session& session,
                                             std::string& why_not) {
    FxQxResult r = fxqx_detect(phi, session);
    if (r.tag == FxQxTag::Found) {
        Expr shift = integrate(ratnormal(div(r.sym->Q, r.sym->F)), "x", session, "riccati.shift");
        return Step1Hit{r.sym->F, r.sym->Q, "fxqx", LinearHint{one(), neg(shift)}};
    }
    if (r.tag == FxQxTag::Separable) return Step1Hit{r.sym->F, zero(), "separable", std::nullopt};
    why_not = r.detail;
    std::string err;
    auto c = extract_coeffs(phi, session, err);
    if (!c) {
        why_not += "; " + err;
        return std::nullopt;
    }
    if (is_zero(c->f0, session).zero) {
        why_not += "; f0 = 0: Chini invariant undefined (Bernoulli)";
        return std::nullopt;
    }
    RiccatiInfo inv = riccati_invariants(*c);
    if (!is_zero(diff(inv.chini, "x"), session).zero) {
        why_not += "; Chini invariant s3^2/s2^3 is not constant";
        return std::nullopt;
    }
    Expr root = sqrt_simplified(ratnormal(div(c->f2, c->f0)));
    Expr xi = div(root, c->f2);
    Expr P = div(sub(mul(diff(c->f0, "x"), c->f2), mul(c->f0, diff(c->f2, "x"))),
                 mul({num(2), pow(c->f0, num(2)), c->f2, root}));
    // u = y exp(-Int(P/xi, x)) separates the ODE
    Expr damp = elem(ElemFn::Exp, neg(integrate(ratnormal(div(P, xi)), "x", session,
                                                "riccati.chini_scale")));
    return Step1Hit{xi, mul(P, sym("y")), "chini", LinearHint{damp, zero()}};
}

}  // namespace detail

inline Classification riccati_strategy(const Expr& phi, Session& session) {
    Classification cls;
    std::string err;
    auto c = detail::extract_coeffs(phi, session, err);
    if (!c) {
        cls.outcome = Outcome::NotInClass;
        cls.failed_condition = err;
        cls.probabilistic = session.any_probabilistic;
        return cls;
    }
    bool bernoulli = is_zero(c->f0, session).zero;
    std::optional<RiccatiInfo> info;
    if (!bernoulli) info = detail::riccati_invariants(*c);
    std::vector<std::string> whys;

    // finalize a candidate; a symmetry that fails the determining equation is
    // dropped and the strategy moves on to the next step
    auto succeed = [&](Classification&& out) -> std::optional<Classification> {
        out.riccati = info ? info : out.riccati;
        finalize_classification(out, phi, session);
        if (!out.symmetry) {
            whys.push_back(out.case_label + ": " + out.failed_condition);
            if (info) {
                info->step = 0;
                info->family.clear();
            }
            return std::nullopt;
        }
        return std::move(out);
    };

    // step 1 on the ODE itself
    {
        std::string why;
        if (auto hit = detail::riccati_step1(phi, session, why)) {
            Classification out;
            out.symmetry = LinearSymmetry{hit->xi, hit->eta};
            out.hint = hit->hint;
            if (info) {
                info->step = 1;
                info->family = hit->method;
            }
            if (hit->method == "chini") {
                out.outcome = Outcome::RiccatiSolved;
                out.case_label = "RiccatiChini";
            } else {
                out.outcome = Outcome::FxQxDirect;
                out.case_label = hit->method == "separable" ? "Separable" : "FxQxDirect";
            }
            if (auto done = succeed(std::move(out))) return std::move(*done);
        } else {
            whys.push_back("step 1: " + why);
        }
    }

    // step 2: families f = p (y -> u/f2) and q = p (y -> u - 1)
    struct Step2 {
        const char* family;
        Expr U, inverse;
        Expr c1, c0;  // U = c1 y + c0, for composing the quadrature hint
    };
    Step2 families[2] = {
        {"f=p", mul(c->f2, sym("y")), div(sym("y"), c->f2), c->f2, zero()},
        {"q=p", add(sym("y"), one()), sub(sym("y"), one()), one(), one()},
    };
    for (auto& fam : families) {
        Expr tphi = transformed_phi(phi, fam.U, fam.inverse, session);
        std::string why;
        if (auto hit = detail::riccati_step1(tphi, session, why)) {
            try {
                Classification out;
                out.symmetry = pullback_symmetry(hit->xi, hit->eta, fam.U, session);
                if (hit->hint)
                    out.hint = LinearHint{mul(hit->hint->p, fam.c1),
                                          add(mul(hit->hint->p, fam.c0), hit->hint->q)};
                out.outcome = Outcome::RiccatiSolved;
                out.case_label = std::string("Riccati ") + fam.family;
                out.reduction.push_back({fam.family, fam.U, fam.inverse});
                if (info) {
                    info->step = 2;
                    info->family = fam.family;
                }
                if (auto done = succeed(std::move(out))) return std::move(*done);
                continue;
            } catch (const PullbackNotLinear& e) {
                why += std::string("; ") + e.what();
            }
        }
        whys.push_back(std::string("step 2 (") + fam.family + "): " + why);
    }

    // step 3: family f = q, p reconstructed from the invariants
    if (!bernoulli) {
        const Expr& s2 = info->s2;
        const Expr& s3 = info->s3;
        Expr s2p = diff(s2, "x");
        Expr den = ratnormal(mul(s2, sub(mul({num(2), s2, diff(s3, "x")}), mul({num(3), s3, s2p}))));
        if (is_zero(den, session).zero) {
            whys.push_back("step 3 (f=q): denominator of p vanishes (constant Chini invariant)");
        } else {
            Expr f2p = diff(c->f2, "x");
            Expr numr = mul(c->f2,
                            add(sub(mul({num(3), s2, diff(c->f2, "x", 2), s2p}),
                                    mul({num(2), pow(s2, num(2)), diff(c->f2, "x", 3)})),
                                mul(add(sub(mul(sub(diff(s2, "x", 2), info->s4), s2),
                                            add(mul(num(8), pow(s2, num(3))),
                                                mul(num(2), pow(s2p, num(2))))),
                                        mul(num(2), pow(s3, num(2)))),
                                    f2p)));
            Expr p = ratnormal(div(numr, den));
            if (is_zero(p, session).zero) {
                whys.push_back("step 3 (f=q): reconstructed p vanishes");
            } else {
                Expr pp = diff(p, "x");
                Expr a = ratnormal(
                    div(add(sub(mul(c->f1, p), mul(num(2), pow(c->f2, num(2)))), pp), c->f2));
                Expr b = ratnormal(div(add(add(mul(c->f0, pow(p, num(2))),
                                               mul(c->f2, sub(pow(c->f2, num(2)),
                                                              add(mul(c->f1, p), pp)))),
                                           mul(f2p, p)),
                                       c->f2));
                bool ca = is_zero(diff(a, "x"), session).zero;
                bool cb = ca && is_zero(diff(b, "x"), session).zero;
                if (cb) {
                    Classification out;
                    out.symmetry = LinearSymmetry{
                        div(p, c->f2),
                        ratnormal(neg(div(add(mul(pp, sym("y")), f2p), c->f2)))};
                    out.outcome = Outcome::RiccatiSolved;
                    out.case_label = "Riccati f=q";
                    out.hint = LinearHint{p, c->f2};
                    info->step = 3;
                    info->family = "f=q";
                    info->a = scrub_symbol(a, "x", session);
                    info->b = scrub_symbol(b, "x", session);
                    if (auto done = succeed(std::move(out))) return std::move(*done);
                } else {
                    whys.push_back(std::string("step 3 (f=q): ") +
                                   (ca ? "b is not constant" : "a is not constant"));
                }
            }
        }
    } else {
        whys.push_back("step 3 (f=q): f0 = 0, invariants undefined (Bernoulli)");
    }

    cls.outcome = Outcome::DegenerateRiccatiPath;
    cls.riccati = info;
    std::string joined;
    for (auto& w : whys) {
        if (!joined.empty()) joined += "; ";
        joined += w;
    }
    cls.failed_condition = joined;
    cls.probabilistic = session.any_probabilistic;
    return cls;
}

}  // namespace symline
