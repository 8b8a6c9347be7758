#pragma once

// Numeric probing: evaluate expressions at random instances to decide zero
// identities the rational normal form cannot settle. Arbitrary function
// symbols are instantiated as c0 + c1 z + c2 z^2 + c3 z^3 + c4 e^(c5 z), whose
// derivatives of any order evaluate exactly. Zero verdicts reached by probing
// are probabilistic and flagged; nonzero verdicts come with a witness value
// far above the noise floor.

#include "symline/calculus.hpp"
#include "symline/ratform.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace symline {

struct ProbeConfig {
    uint64_t seed = 1;
    int n_probes = 8;
    double abs_tol = 1e-9;
    double rel_tol = 1e-9;
};

struct ProbeFailure : std::runtime_error {
    explicit ProbeFailure(const std::string& what) : std::runtime_error(what) {}
};

struct EvalError : std::runtime_error {
    explicit EvalError(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroVerdict {
    bool zero;
    bool probabilistic;
};

struct Session {
    ProbeConfig probe;
    bool any_probabilistic = false;
    // when set, every symbolic zero verdict is re-probed at two seeds and
    // disagreements are counted (consistency audit, normally off)
    bool cross_check = false;
    long cross_checks = 0;
    long contradictions = 0;
    // classification only: skip the quadrature step (used by the corpus
    // generator to check which strategy step an instance resolves at)
    bool skip_quadrature = false;
    std::vector<std::string> integrate_sites;
};

using CN = std::complex<double>;

// model instance for a function symbol
struct FunProbe {
    double c[6];

    CN value(CN z, int order) const {
        // polynomial part, differentiated `order` times
        double coef[4] = {c[0], c[1], c[2], c[3]};
        for (int k = 0; k < order; ++k) {
            double next[4] = {coef[1], 2 * coef[2], 3 * coef[3], 0};
            for (int i = 0; i < 4; ++i) coef[i] = next[i];
        }
        CN p = coef[0] + z * (coef[1] + z * (coef[2] + z * coef[3]));
        CN e = c[4] * std::pow(c[5], order) * std::exp(c[5] * z);
        return p + e;
    }
};

struct Assignment {
    std::map<std::string, double> vars;  // symbols and parameters
    std::map<std::string, FunProbe> funs;
};

namespace detail {

inline CN checked(CN v, const char* what) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw EvalError(std::string("non-finite value in ") + what);
    return v;
}

class Evaluator {
  public:
    Evaluator(const Assignment& a) : a_(a) {}

    double max_magnitude = 1.0;

    CN eval(const Expr& e) {
        CN v = eval_raw(e);
        double m = std::abs(v);
        if (m > max_magnitude) max_magnitude = m;
        return v;
    }

  private:
    const Assignment& a_;
    std::map<std::string, CN> locals_;  // integration dummies
    std::map<std::pair<const void*, std::pair<double, double>>, CN> int_cache_;
    int depth_ = 0;
    long evals_ = 0;  // node visits; adaptive quadrature can explode otherwise

    CN eval_raw(const Expr& e) {
        if (++evals_ > 500000) throw EvalError("evaluation work limit");
        switch (e->kind) {
            case Kind::Num:
                return e->value.convert_to<double>();
            case Kind::Sym:
            case Kind::Par: {
                if (auto it = locals_.find(e->name); it != locals_.end()) return it->second;
                auto it = a_.vars.find(e->name);
                if (it == a_.vars.end()) throw EvalError("unbound name " + e->name);
                return it->second;
            }
            case Kind::Sum: {
                CN s = 0;
                for (auto& k : e->kids) s += eval(k);
                return checked(s, "sum");
            }
            case Kind::Prod: {
                CN p = 1;
                for (auto& k : e->kids) p *= eval(k);
                return checked(p, "product");
            }
            case Kind::Pow: {
                CN b = eval(e->kids[0]);
                if (e->kids[1]->kind == Kind::Num && is_integer(e->kids[1]->value)) {
                    long n = e->kids[1]->value.convert_to<long>();
                    if (std::abs(b) < 1e-280 && n < 0) throw EvalError("0^negative");
                    return checked(std::pow(b, static_cast<double>(n)), "power");
                }
                CN x = eval(e->kids[1]);
                if (std::abs(b) < 1e-280) throw EvalError("power of zero base");
                // principal branch
                return checked(std::exp(x * std::log(b)), "power");
            }
            case Kind::Elem: {
                CN a = eval(e->kids[0]);
                switch (e->fn) {
                    case ElemFn::Exp:
                        if (a.real() > 300) throw EvalError("exp overflow");
                        return std::exp(a);
                    case ElemFn::Ln:
                        if (std::abs(a) < 1e-280) throw EvalError("ln of zero");
                        return std::log(a);
                    case ElemFn::Sin: return std::sin(a);
                    case ElemFn::Cos: return std::cos(a);
                    case ElemFn::Tan: {
                        CN c = std::cos(a);
                        if (std::abs(c) < 1e-8) throw EvalError("tan near pole");
                        return std::sin(a) / c;
                    }
                    case ElemFn::Arctan: return std::atan(a);
                }
                throw EvalError("unreachable");
            }
            case Kind::Fun: {
                auto it = a_.funs.find(e->name);
                if (it == a_.funs.end()) throw EvalError("unbound function " + e->name);
                return checked(it->second.value(eval(e->kids[0]), e->order), "function");
            }
            case Kind::Int: {
                CN up = eval(sym(e->var));
                return quad_memo(e, up);
            }
            case Kind::IntTo: {
                CN up = eval(e->kids[1]);
                return quad_memo(e, up);
            }
        }
        throw EvalError("unreachable");
    }

    // The value of an unevaluated integral is only pinned down to a constant
    // of integration, and every consumer here (determining residuals, total
    // derivatives of implicit solutions) is insensitive to that constant, so
    // the anchor and the path are free as long as they stay deterministic.
    // Caching keeps repeated occurrences of the same node consistent within
    // one evaluation and avoids re-integrating shared subtrees.
    CN quad_memo(const Expr& e, CN up) {
        bool cacheable = locals_.empty();  // integrand closed over no outer dummy
        std::pair<const void*, std::pair<double, double>> key{
            e.get(), {up.real(), up.imag()}};
        if (cacheable) {
            if (auto it = int_cache_.find(key); it != int_cache_.end()) return it->second;
        }
        CN r = quad(e->kids[0], e->var, up);
        if (cacheable) int_cache_[key] = r;
        return r;
    }

    // adaptive Simpson from an anchor to up, with the dummy bound locally.
    // The path bulges into the upper half plane to step around poles on the
    // real axis, and the anchor moves off 1 when the integrand is singular
    // there (generated coefficients often carry factors like (x - 1)^k).
    CN quad(const Expr& h, const std::string& dummy, CN up) {
        if (++depth_ > 12) throw EvalError("integral nesting too deep");
        static const double anchors[] = {1.0, 0.6015625, 1.3828125, 1.8671875, 2.4140625};
        CN r;
        bool done = false;
        std::string err = "integration failed at every anchor";
        for (double anchor : anchors) {
            CN dz = up - anchor;
            double bump = std::min(0.35 * std::abs(dz), 0.75);
            auto f = [&](double t) {
                auto saved = locals_.find(dummy);
                CN old = 0;
                bool had = saved != locals_.end();
                if (had) old = saved->second;
                locals_[dummy] = anchor + t * dz + CN(0.0, bump * t * (1.0 - t));
                CN v = eval(h) * (dz + CN(0.0, bump * (1.0 - 2.0 * t)));
                if (had) locals_[dummy] = old;
                else locals_.erase(dummy);
                return v;
            };
            try {
                CN fa = f(0.0), fm = f(0.5), fb = f(1.0);
                r = checked(adaptive(f, 0.0, 1.0, fa, fm, fb, simpson(0.0, 1.0, fa, fm, fb),
                                     1e-10, 20),
                            "integral");
                done = true;
                break;
            } catch (const EvalError& e) {
                err = e.what();
            }
        }
        --depth_;
        if (!done) throw EvalError(err);
        return r;
    }

    static CN simpson(double a, double b, CN fa, CN fm, CN fb) {
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    }

    template <class F>
    CN adaptive(F& f, double a, double b, CN fa, CN fm, CN fb, CN whole, double tol, int depth) {
        if (b - a < 1e-14) return whole;
        double m = (a + b) / 2;
        double lm = (a + m) / 2, rm = (m + b) / 2;
        CN flm = f(lm), frm = f(rm);
        CN left = simpson(a, m, fa, flm, fm);
        CN right = simpson(m, b, fm, frm, fb);
        if (depth <= 0 || std::abs(left + right - whole) < 15 * tol)
            return left + right + (left + right - whole) / 15.0;
        return adaptive(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
               adaptive(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
    }
};

inline Assignment make_assignment(const FreeNames& names, uint64_t seed, int probe, int attempt) {
    std::seed_seq sq{seed, static_cast<uint64_t>(probe), static_cast<uint64_t>(attempt)};
    std::mt19937_64 rng(sq);
    std::uniform_real_distribution<double> upos(0.4, 2.7);
    std::uniform_real_distribution<double> uany(-3.0, 3.0);
    std::uniform_real_distribution<double> usmall(-2.0, 2.0);
    Assignment a;
    // spread symbol magnitudes over a few decades: factors like exp(-c x^2)
    // with large c look like zero when every probe sits at |x| ~ 1
    std::uniform_int_distribution<int> mag(0, 2);
    for (auto& s : names.syms) {
        double v = upos(rng);
        for (int i = mag(rng); i > 0; --i) v /= 8.0;
        a.vars[s] = v;
    }
    for (auto& p : names.pars) {
        double v = uany(rng);
        if (std::fabs(v) < 0.1) v = v < 0 ? v - 0.35 : v + 0.35;
        // keep parameters away from integers: small cancellations there can
        // hide genuine dependence
        if (std::fabs(v - std::round(v)) < 0.05) v += 0.13;
        a.vars[p] = v;
    }
    for (auto& f : names.funs) {
        FunProbe fp;
        for (int i = 0; i < 4; ++i) {
            double v = usmall(rng);
            if (std::fabs(v) < 0.2) v = v < 0 ? v - 0.4 : v + 0.4;
            fp.c[i] = v;
        }
        fp.c[4] = 0.5 + 1.5 * (upos(rng) - 0.4) / 2.3;
        double c5 = usmall(rng) / 2.0;
        if (std::fabs(c5) < 0.15) c5 = c5 < 0 ? c5 - 0.25 : c5 + 0.25;
        fp.c[5] = c5;
        a.funs[f] = fp;
    }
    return a;
}

}  // namespace detail

// evaluate once under a concrete assignment; throws EvalError on domain
// issues. Values are complex so that logs and fractional powers of negative
// quantities probe on their principal branch instead of failing
inline CN eval_at(const Expr& e, const Assignment& a, double* scale = nullptr) {
    detail::Evaluator ev(a);
    CN v = ev.eval(e);
    if (scale) *scale = ev.max_magnitude;
    return v;
}

namespace detail {

// probe verdict: true = zero at all evaluable points, false = nonzero
// witness, nullopt = too few evaluable points
inline std::optional<bool> probe_zero(const Expr& e, const ProbeConfig& pc, uint64_t seed) {
    FreeNames names = free_names(e);
    int done = 0;
    for (int probe = 0; done < pc.n_probes && probe < pc.n_probes * 25; ++probe) {
        Assignment a = make_assignment(names, seed, probe, 0);
        double scale = 1.0;
        CN v;
        try {
            v = eval_at(e, a, &scale);
        } catch (const EvalError&) {
            continue;
        }
        if (std::abs(v) > pc.abs_tol + pc.rel_tol * scale) return false;
        ++done;
    }
    if (done < pc.n_probes) return std::nullopt;
    return true;
}

}  // namespace detail

inline ZeroVerdict is_zero(const Expr& e, Session& session) {
    const ProbeConfig& pc = session.probe;
    try {
        // once the exact-arithmetic meter is spent, every further rat_is_zero
        // burns a full gcd budget for nothing; probe directly instead
        if (!detail::work_budget_spent() && rat_is_zero(e)) {
            if (session.cross_check) {
                ++session.cross_checks;
                for (uint64_t s : {pc.seed, pc.seed + 1009}) {
                    auto p = detail::probe_zero(e, pc, s);
                    if (p && !*p) ++session.contradictions;
                }
            }
            return {true, false};
        }
    } catch (const MathError&) {
        // fall through to probing
    }
    auto p = detail::probe_zero(e, pc, pc.seed);
    if (!p) throw ProbeFailure("could not evaluate expression at enough probe points");
    if (!*p) return {false, false};
    session.any_probabilistic = true;
    return {true, true};
}

inline bool is_free_of(const Expr& e, const std::string& name, Session& session) {
    if (!contains_symbol(e, name)) return true;
    return is_zero(diff(e, name), session).zero;
}

// coefficients of e as a polynomial in the symbol v, via derivatives;
// nullopt when e is not polynomial in v of degree <= maxdeg
inline std::optional<std::vector<Expr>> poly_parts(const Expr& e, const std::string& v, int maxdeg,
                                                   Session& session) {
    std::vector<Expr> coeffs(static_cast<size_t>(maxdeg) + 1);
    Expr vx = sym(v);
    // highest coefficient first: c_k = diff(e, v, k)/k!
    std::vector<Expr> derivs{e};
    for (int k = 1; k <= maxdeg; ++k) derivs.push_back(diff(derivs.back(), v));
    if (!is_zero(diff(derivs.back(), v), session).zero) return std::nullopt;
    Rat fact = 1;
    for (int k = 2; k <= maxdeg; ++k) fact *= k;
    Expr ck = mul(num(Rat(1) / fact), derivs[static_cast<size_t>(maxdeg)]);
    for (int k = maxdeg; k >= 0; --k) {
        coeffs[static_cast<size_t>(k)] = ck;
        if (!is_free_of(ck, v, session)) return std::nullopt;
        if (k == 0) break;
        // c_{k-1} = (d^{k-1}e - sum_{j>=k} j!/(j-k+1)! c_j v^{j-k+1}) / (k-1)!
        Expr d = derivs[static_cast<size_t>(k - 1)];
        for (int j = k; j <= maxdeg; ++j) {
            Rat falling = 1;
            for (int t = 0; t < k - 1; ++t) falling *= (j - t);
            d = sub(d, mul({num(falling), coeffs[static_cast<size_t>(j)], pow(vx, num(Rat(j - k + 1)))}));
        }
        Rat fk = 1;
        for (int t = 2; t <= k - 1; ++t) fk *= t;
        ck = mul(num(Rat(1) / fk), d);
    }
    return coeffs;
}

}  // namespace symline
