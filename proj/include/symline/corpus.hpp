#pragma once

// Deterministic generators for class members and non-members. Members are
// instances of y' = (f'/p) G(p y + q) - q'/p - (p'/p) y with rational f, p, q
// (small integer coefficients, so the normal form cancels fully) and G drawn
// from a small catalog; the catalog entry decides which classification case
// the pipeline must land in. Riccati members use G = u^2 + a u + b with the
// coefficient form of the paper's four solvable families.

#include "symline/problem.hpp"

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace symline {

struct DegenerateSpec : MathError {
    explicit DegenerateSpec(const std::string& what) : MathError(what) {}
};

struct GeneratedOde {
    Expr phi;
    LinearSymmetry sym;            // ground truth
    std::optional<Expr> solution;  // implicit lhs, when 1/G has a listed antiderivative
    std::string expected_case;
    std::string family;            // "gts" or the riccati family constraint
    std::optional<Rat> a, b;       // riccati template constants
};

namespace detail {

inline long rand_small(std::mt19937_64& rng, bool nonzero = true) {
    std::uniform_int_distribution<long> d(-3, 3);
    long v = d(rng);
    while (nonzero && v == 0) v = d(rng);
    return v;
}

// rational block: c1*x + c0, c*x^2 + d, or c*x; nonconstant unless allowed
inline Expr rand_block(std::mt19937_64& rng, bool allow_const = false) {
    std::uniform_int_distribution<int> shape(0, allow_const ? 4 : 3);
    switch (shape(rng)) {
        case 0: return mul(num(rand_small(rng)), sym("x"));
        case 1: return add(mul(num(rand_small(rng)), sym("x")), num(rand_small(rng)));
        case 2: return add(mul(num(rand_small(rng)), pow(sym("x"), num(2))), num(rand_small(rng)));
        case 3: return mul(num(rand_small(rng)), pow(sym("x"), num(2)));
        default: return num(rand_small(rng));
    }
}

// degree <= 1 block for the high-degree G entries, where quadratic p or q
// pushes the exact reduction into coefficient sizes that blow the gcd budget
inline Expr rand_linear(std::mt19937_64& rng, bool allow_const = false) {
    std::uniform_int_distribution<int> shape(0, allow_const ? 2 : 1);
    switch (shape(rng)) {
        case 0: return mul(num(rand_small(rng)), sym("x"));
        case 1: return add(mul(num(rand_small(rng)), sym("x")), num(rand_small(rng)));
        default: return num(rand_small(rng));
    }
}

struct GCatalog {
    std::string name;
    Expr G;                        // in the placeholder symbol u
    std::optional<Expr> invG_int;  // antiderivative of 1/G in u, when listed
    std::string expected_case;     // for p' != 0
};

inline std::vector<GCatalog> g_catalog(std::mt19937_64& rng) {
    Expr u = sym("u");
    std::vector<GCatalog> cat;
    cat.push_back({"exp", elem(ElemFn::Exp, u),
                   neg(elem(ElemFn::Exp, neg(u))), "CaseAy0"});
    cat.push_back({"uexp", add(u, elem(ElemFn::Exp, u)), std::nullopt, "CaseAy0"});
    long c = rand_small(rng);
    cat.push_back({"cubic", add(pow(u, num(3)), mul(num(c), u)), std::nullopt, "CaseAyy0"});
    long d = rand_small(rng);
    cat.push_back({"quartic",
                   add(pow(u, num(4)), add(mul(num(d), pow(u, num(2))), num(1))),
                   std::nullopt, "CaseGeneral"});
    long e = rand_small(rng);
    cat.push_back({"quintic", add(pow(u, num(5)), mul(num(e), pow(u, num(3)))),
                   std::nullopt, "CaseGeneral"});
    return cat;
}

}  // namespace detail

struct GtsSpec {
    Expr f;  // f' != 0
    Expr p;  // nonzero
    Expr q;
    Expr G;                        // in the symbol u
    std::optional<Expr> invG_int;  // antiderivative of 1/G in u
    std::string expected_case;
};

// instantiate the invariant family for the spec; throws DegenerateSpec when
// the instance degenerates (phi_yyy = 0 for a non-Riccati template)
inline GeneratedOde gen_gts(const GtsSpec& spec) {
    Expr fp = diff(spec.f, "x");
    Expr pp = diff(spec.p, "x");
    Expr qp = diff(spec.q, "x");
    Expr U = add(mul(spec.p, sym("y")), spec.q);
    Expr phi = sub(mul(div(fp, spec.p), substitute(spec.G, "u", U)),
                   add(div(qp, spec.p), mul(div(pp, spec.p), sym("y"))));
    phi = ratnormal(phi);
    GeneratedOde out;
    out.phi = phi;
    out.family = "gts";
    out.expected_case = spec.expected_case;
    out.sym = LinearSymmetry{pow(fp, num(-1)),
                             ratnormal(neg(div(add(mul(pp, sym("y")), qp), mul(fp, spec.p))))};
    if (spec.invG_int)
        out.solution = sub(spec.f, substitute(*spec.invG_int, "u", U));
    if (rat_is_zero(diff(phi, "y", 3)))
        throw DegenerateSpec("instantiated phi has phi_yyy = 0");
    return out;
}

// random member; the expected case follows the G catalog, with p' = 0 picks
// landing in FxQxDirect/Separable instead
inline GeneratedOde gen_gts(uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (int attempt = 0; attempt < 32; ++attempt) {
        auto cat = detail::g_catalog(rng);
        std::uniform_int_distribution<size_t> pick(0, cat.size() - 1);
        auto& g = cat[pick(rng)];
        bool heavy = g.name == "quartic" || g.name == "quintic";
        GtsSpec spec;
        spec.f = detail::rand_block(rng);
        spec.p = heavy ? detail::rand_linear(rng) : detail::rand_block(rng);
        spec.q = heavy ? detail::rand_linear(rng, true) : detail::rand_block(rng, true);
        std::uniform_int_distribution<int> coin(0, 5);
        if (coin(rng) == 0) spec.p = num(detail::rand_small(rng));  // FxQx slice
        spec.G = g.G;
        spec.invG_int = g.invG_int;
        bool p_const = rat_is_zero(diff(spec.p, "x"));
        bool q_const = rat_is_zero(diff(spec.q, "x"));
        spec.expected_case =
            p_const ? (q_const ? std::string("Separable") : std::string("FxQxDirect"))
                    : g.expected_case;
        try {
            GeneratedOde out = gen_gts(spec);
            // keep instances inside the solver's comfortable exact range:
            // two independent y-carrying kernels or oversized coefficients
            // make the reduction arithmetic disproportionately expensive
            RatForm rf = rat_normalize(out.phi);
            int ykern = 0;
            for (auto& k : rf.kernels)
                if (k.tag->kind != Kind::Sym && contains_symbol(k.tag, "y")) ++ykern;
            size_t nterms = rf.value.num.terms.size() + rf.value.den.terms.size();
            long bits = 0;
            for (auto& [m, c] : rf.value.num.terms) {
                BigInt n = boost::multiprecision::abs(rat_num(c));
                if (n != 0) bits = std::max(bits, static_cast<long>(boost::multiprecision::msb(n)));
            }
            if (ykern >= 2 || nterms > 30 || bits > 10 ||
                rf.value.num.total_degree() > 10)
                continue;
            // reject instances that accidentally admit a direct [F, Q]
            // symmetry when a reduction case is expected
            if (!p_const) {
                Session s;
                FxQxTag t = fxqx_detect(out.phi, s).tag;
                if (t == FxQxTag::Found || t == FxQxTag::Separable) continue;
            }
            return out;
        } catch (const MathError&) {
            continue;
        } catch (const ProbeFailure&) {
            continue;
        }
    }
    throw DegenerateSpec("no usable member after 32 attempts");
}

// Riccati member of the family named by the constraint among {f, p, q}:
// y' = f y^2 + ((a + 2q) f - p')/p y + (((a + q) q + b) f - q' p)/p^2
inline GeneratedOde gen_riccati(const std::string& family, uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (int attempt = 0; attempt < 64; ++attempt) {
        Rat a = Rat(detail::rand_small(rng, false));
        Rat b = Rat(detail::rand_small(rng));
        Expr p = detail::rand_block(rng);
        Expr q = detail::rand_block(rng, true);
        Expr f = detail::rand_block(rng);
        std::string expected;
        if (family == "q'=0") {
            Rat qc = Rat(detail::rand_small(rng, false));
            q = num(qc);
            // f2/f0 = p^2/k with k = (a+q)q + b; the Chini symmetry carries
            // sqrt(f2/f0), so keep k positive for a real symmetry
            if ((a + qc) * qc + b <= 0) continue;
            expected = "RiccatiChini";
        } else if (family == "f=p") {
            f = p;
            expected = "Riccati f=p";
        } else if (family == "q=p") {
            q = p;
            expected = "Riccati q=p";
        } else if (family == "f=q") {
            f = q = detail::rand_block(rng);
            expected = "Riccati f=q";
        } else {
            throw MathError("unknown riccati family: " + family);
        }
        Expr pp = diff(p, "x");
        Expr qp = diff(q, "x");
        if (family != "q'=0" && (rat_is_zero(pp) || rat_is_zero(qp))) continue;
        if (family == "q'=0" && rat_is_zero(pp)) continue;
        Expr ea = num(a), eb = num(b);
        Expr f1 = div(sub(mul(add(ea, mul(num(2), q)), f), pp), p);
        Expr f0 = div(sub(mul(add(mul(add(ea, q), q), eb), f), mul(qp, p)), pow(p, num(2)));
        Expr phi;
        try {
            phi = ratnormal(add(mul(f, pow(sym("y"), num(2))), add(mul(f1, sym("y")), f0)));
        } catch (const MathError&) {
            continue;
        }
        // keep f2 and f0 nonzero so the instance is genuinely Riccati
        if (rat_is_zero(f) || rat_is_zero(ratnormal(f0))) continue;
        // families beyond Chini need a non-constant invariant, otherwise the
        // strategy resolves them one step early
        if (family != "q'=0") {
            Session s;
            std::string err;
            auto c = detail::extract_coeffs(phi, s, err);
            if (!c) continue;
            RiccatiInfo inv = detail::riccati_invariants(*c);
            try {
                if (rat_is_zero(ratnormal(diff(inv.chini, "x")))) continue;
            } catch (const MathError&) {
                continue;
            }
            FxQxTag t = fxqx_detect(phi, s).tag;
            if (t == FxQxTag::Found || t == FxQxTag::Separable) continue;
        }
        GeneratedOde out;
        out.phi = phi;
        out.family = family;
        out.expected_case = expected;
        out.a = a;
        out.b = b;
        out.sym = LinearSymmetry{ratnormal(div(p, f)),
                                 ratnormal(neg(div(add(mul(pp, sym("y")), qp), f)))};
        return out;
    }
    throw DegenerateSpec("no usable " + family + " member after 64 attempts");
}

// negative controls: shapes that violate membership
inline GeneratedOde gen_nonmember(uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, 2);
    long c = detail::rand_small(rng);
    std::uniform_int_distribution<long> kd(1, 3);
    long k = kd(rng);
    GeneratedOde out;
    out.family = "nonmember";
    Expr y = sym("y");
    switch (pick(rng)) {
        case 0:
            // I = A_xy/A_yy picks up a ln(y) dependence
            out.phi = add(pow(y, num(3)),
                          mul({num(c), pow(sym("x"), num(k)), pow(y, num(3)), elem(ElemFn::Ln, y)}));
            out.expected_case = "NotInClass";
            break;
        case 1:
            out.phi = elem(ElemFn::Sin, mul({num(c), sym("x"), y}));
            out.expected_case = "NotInClass";
            break;
        default:
            // Riccati with non-constant invariant outside every family
            out.phi = add(pow(y, num(2)), pow(sym("x"), num(k)));
            out.expected_case = "DegenerateRiccatiPath";
            break;
    }
    out.sym = LinearSymmetry{zero(), zero()};
    return out;
}

// problem-file text with an expect block, as consumed by the cli module
inline std::string problem_text(const GeneratedOde& g, const std::string& label) {
    std::string s = "# " + label + " (" + g.family + ")\n";
    s += "ode: y' = " + render(g.phi) + "\n";
    s += "expect.class: " + g.expected_case + "\n";
    if (!rat_is_zero(g.sym.xi) || !rat_is_zero(g.sym.eta)) {
        s += "expect.xi: " + render(g.sym.xi) + "\n";
        s += "expect.eta: " + render(g.sym.eta) + "\n";
    }
    if (g.solution) s += "expect.solution: " + render(*g.solution) + "\n";
    return s;
}

}  // namespace symline
