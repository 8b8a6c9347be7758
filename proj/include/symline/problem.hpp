#pragma once

// Problem files and the per-file pipeline: parse the `ode:` statement, solve
// it for y' (degree <= 2), classify every branch, match optional expect
// blocks and assemble a machine-readable report.
//
// File format, one directive per line ('#' starts a comment):
//   param a, n
//   func f, g
//   ode: x*y' + a*y - f(x)*g(x^a*y) = 0
//   expect.class: CaseGeneral
//   expect.xi: ...        expect.eta: ...        expect.solution: ...

#include "symline/classify.hpp"
#include "symline/parse.hpp"

#include <json.hpp>

#include <chrono>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace symline {

struct ProblemError : std::runtime_error {
    explicit ProblemError(const std::string& what) : std::runtime_error(what) {}
};

struct UnsupportedDegree : ProblemError {
    explicit UnsupportedDegree(const std::string& what) : ProblemError(what) {}
};

struct NotAnODE : ProblemError {
    explicit NotAnODE(const std::string& what) : ProblemError(what) {}
};

struct ProblemFile {
    std::string name;
    std::set<std::string> params;
    std::set<std::string> funcs;
    std::string ode_text;                      // statement as written
    Expr equation;                             // lhs - rhs, contains y'
    std::map<std::string, std::string> expect; // keys: class, xi, eta, solution
};

namespace detail {

inline std::string strip(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline void split_names(const std::string& list, std::set<std::string>& out) {
    std::string cur;
    for (char ch : list + ",") {
        if (ch == ',' || ch == ' ' || ch == '\t') {
            if (!cur.empty()) out.insert(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
}

}  // namespace detail

inline ProblemFile parse_problem(const std::string& text, const std::string& name = "") {
    ProblemFile pf;
    pf.name = name;
    std::string ode_stmt;
    size_t pos = 0;
    int lineno = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        std::string line = text.substr(pos, nl == std::string::npos ? nl : nl - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::strip(line);
        if (line.empty()) continue;
        auto directive = [&](const char* key) -> std::optional<std::string> {
            std::string k = key;
            if (line.rfind(k, 0) != 0) return std::nullopt;
            char next = line.size() > k.size() ? line[k.size()] : '\0';
            if (k.back() != ':' && next != ' ' && next != '\t') return std::nullopt;
            return detail::strip(line.substr(k.size()));
        };
        if (auto v = directive("param")) {
            detail::split_names(*v, pf.params);
        } else if (auto v = directive("func")) {
            detail::split_names(*v, pf.funcs);
        } else if (auto v = directive("ode:")) {
            if (!ode_stmt.empty())
                throw ProblemError("line " + std::to_string(lineno) + ": second ode statement");
            ode_stmt = *v;
        } else if (auto v = directive("expect.class:")) {
            pf.expect["class"] = *v;
        } else if (auto v = directive("expect.xi:")) {
            pf.expect["xi"] = *v;
        } else if (auto v = directive("expect.eta:")) {
            pf.expect["eta"] = *v;
        } else if (auto v = directive("expect.solution:")) {
            pf.expect["solution"] = *v;
        } else {
            throw ProblemError("line " + std::to_string(lineno) + ": unrecognized directive: " + line);
        }
    }
    if (ode_stmt.empty()) throw ProblemError("missing ode statement");
    pf.ode_text = ode_stmt;

    ParseOptions opt;
    opt.params = pf.params;
    opt.funcs = pf.funcs;
    opt.allow_yprime = true;
    size_t eq = ode_stmt.find('=');
    Expr lhs, rhs;
    if (eq == std::string::npos) {
        lhs = parse(ode_stmt, opt);
        rhs = zero();
    } else {
        lhs = parse(ode_stmt.substr(0, eq), opt);
        rhs = parse(ode_stmt.substr(eq + 1), opt);
    }
    pf.equation = sub(lhs, rhs);
    return pf;
}

// solved forms y' = phi of a polynomial equation of degree <= 2 in y'
inline std::vector<Expr> solve_for_yprime(const Expr& equation, Session& session) {
    const std::string& yp = yprime_name();
    if (!contains_symbol(equation, yp)) throw NotAnODE("equation does not mention y'");
    auto parts = poly_parts(equation, yp, 2, session);
    if (!parts) throw UnsupportedDegree("equation is not polynomial of degree <= 2 in y'");
    Expr c0 = scrub_symbol((*parts)[0], yp, session);
    Expr c1 = scrub_symbol((*parts)[1], yp, session);
    Expr c2 = scrub_symbol((*parts)[2], yp, session);
    if (is_zero(c2, session).zero) {
        if (is_zero(c1, session).zero) throw NotAnODE("equation does not involve y'");
        return {ratnormal(neg(div(c0, c1)))};
    }
    Expr disc = ratnormal(sub(pow(c1, num(2)), mul({num(4), c2, c0})));
    Expr root = pow(disc, num(Rat(1, 2)));
    Expr twoc2 = mul(num(2), c2);
    return {div(add(neg(c1), root), twoc2), div(sub(neg(c1), root), twoc2)};
}

struct RunOptions {
    uint64_t seed = 1;
    int probes = 8;
    double tol = 1e-9;
    bool cross_check = false;
};

inline Session make_session(const RunOptions& opt) {
    Session s;
    s.probe.seed = opt.seed;
    s.probe.n_probes = opt.probes;
    s.probe.abs_tol = opt.tol;
    s.probe.rel_tol = opt.tol;
    s.cross_check = opt.cross_check;
    return s;
}

struct BranchResult {
    Expr phi;
    Classification cls;
    std::string error;  // pipeline failure captured instead of a classification
};

struct Report {
    ProblemFile problem;
    RunOptions options;
    std::vector<BranchResult> branches;
    std::string error;  // file-level failure (parse, y' degree)
    bool expect_present = false;
    bool expect_ok = true;
    std::vector<std::string> expect_notes;
    std::vector<std::string> integrate_sites;
    long cross_checks = 0;
    long contradictions = 0;
    long ms = 0;
};

namespace detail {

// projective equality of symmetries: cross products of the pairs vanish and
// the pairs are not trivially zero
inline bool projectively_equal(const LinearSymmetry& a, const LinearSymmetry& b,
                               Session& session) {
    if (!is_zero(sub(mul(a.xi, b.eta), mul(a.eta, b.xi)), session).zero) return false;
    // rule out matching against the zero symmetry through the cross product
    bool a_zero = is_zero(a.xi, session).zero && is_zero(a.eta, session).zero;
    bool b_zero = is_zero(b.xi, session).zero && is_zero(b.eta, session).zero;
    return !a_zero && !b_zero;
}

// two implicit solutions define the same foliation when their gradients are
// proportional
inline bool gradient_proportional(const Expr& a, const Expr& b, Session& session) {
    return is_zero(sub(mul(diff(a, "x"), diff(b, "y")), mul(diff(a, "y"), diff(b, "x"))),
                   session).zero;
}

inline void match_expect(Report& rep, Session& session) {
    const auto& ex = rep.problem.expect;
    if (ex.empty()) return;
    rep.expect_present = true;
    ParseOptions opt;
    opt.params = rep.problem.params;
    opt.funcs = rep.problem.funcs;
    // a file matches when some branch satisfies the whole block
    std::vector<std::string> notes;
    for (auto& br : rep.branches) {
        notes.clear();
        if (!br.error.empty()) {
            notes.push_back("branch error: " + br.error);
            continue;
        }
        if (auto it = ex.find("class"); it != ex.end()) {
            if (br.cls.case_label != it->second &&
                outcome_name(br.cls.outcome) != it->second)
                notes.push_back("class " + br.cls.case_label + " != " + it->second);
        }
        if (ex.count("xi") || ex.count("eta")) {
            if (!br.cls.symmetry) {
                notes.push_back("no symmetry returned");
            } else {
                LinearSymmetry want{ex.count("xi") ? parse(ex.at("xi"), opt) : br.cls.symmetry->xi,
                                    ex.count("eta") ? parse(ex.at("eta"), opt) : br.cls.symmetry->eta};
                // non-uniqueness is tolerated: an independently verified
                // symmetry with a checked solution also counts
                if (!projectively_equal(want, *br.cls.symmetry, session) &&
                    !(br.cls.verified_determining && br.cls.verified_solution))
                    notes.push_back("symmetry is not projectively equal to the expected one");
            }
        }
        if (auto it = ex.find("solution"); it != ex.end()) {
            if (!br.cls.solution)
                notes.push_back("no solution returned");
            else if (!gradient_proportional(parse(it->second, opt), *br.cls.solution, session))
                notes.push_back("solution gradients are not proportional");
        }
        if (notes.empty()) {
            rep.expect_ok = true;
            rep.expect_notes.clear();
            return;
        }
    }
    rep.expect_ok = false;
    rep.expect_notes = notes;
}

}  // namespace detail

inline Report run(const ProblemFile& pf, const RunOptions& options) {
    auto t0 = std::chrono::steady_clock::now();
    Report rep;
    rep.problem = pf;
    rep.options = options;
    Session fsession = make_session(options);
    std::vector<Expr> phis;
    try {
        phis = solve_for_yprime(pf.equation, fsession);
    } catch (const ProblemError& e) {
        rep.error = e.what();
    } catch (const MathError& e) {
        rep.error = e.what();
    } catch (const ProbeFailure& e) {
        rep.error = e.what();
    }
    rep.integrate_sites = fsession.integrate_sites;
    rep.cross_checks = fsession.cross_checks;
    rep.contradictions = fsession.contradictions;
    for (auto& phi : phis) {
        BranchResult br;
        br.phi = phi;
        Session s = make_session(options);
        try {
            br.cls = find_linear_symmetry(phi, s);
        } catch (const MathError& e) {
            br.error = e.what();
        } catch (const ProbeFailure& e) {
            br.error = e.what();
        }
        for (auto& site : s.integrate_sites) rep.integrate_sites.push_back(site);
        rep.cross_checks += s.cross_checks;
        rep.contradictions += s.contradictions;
        rep.branches.push_back(std::move(br));
    }
    if (rep.error.empty()) {
        Session s = make_session(options);
        detail::match_expect(rep, s);
        rep.cross_checks += s.cross_checks;
        rep.contradictions += s.contradictions;
    } else if (!pf.expect.empty()) {
        rep.expect_present = true;
        rep.expect_ok = false;
        rep.expect_notes.push_back("file error: " + rep.error);
    }
    rep.ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                 std::chrono::steady_clock::now() - t0).count();
    return rep;
}

inline nlohmann::ordered_json report_json(const Report& rep) {
    using json = nlohmann::ordered_json;
    auto expr_or_null = [](const std::optional<Expr>& e) {
        return e ? json(render(*e)) : json(nullptr);
    };
    json j;
    j["input"] = rep.problem.ode_text;
    j["params"] = rep.problem.params;
    j["funcs"] = rep.problem.funcs;
    j["branches"] = json::array();
    for (auto& br : rep.branches) {
        json b;
        if (!br.error.empty()) {
            b["phi"] = br.phi ? json(render(br.phi)) : json(nullptr);
            b["error"] = br.error;
            j["branches"].push_back(std::move(b));
            continue;
        }
        const Classification& c = br.cls;
        b["phi"] = render(br.phi);
        b["outcome"] = outcome_name(c.outcome);
        b["case"] = c.case_label;
        b["reduction"] = json::array();
        for (auto& r : c.reduction)
            b["reduction"].push_back({{"kind", r.kind},
                                      {"forward", render(r.forward)},
                                      {"inverse", render(r.inverse)}});
        if (c.symmetry)
            b["symmetry"] = {{"xi", render(c.symmetry->xi)}, {"eta", render(c.symmetry->eta)}};
        else
            b["symmetry"] = nullptr;
        if (c.riccati) {
            const RiccatiInfo& ri = *c.riccati;
            b["riccati"] = {{"s2", render(ri.s2)},   {"s3", render(ri.s3)},
                            {"s4", render(ri.s4)},   {"chini", render(ri.chini)},
                            {"step", ri.step},       {"family", ri.family},
                            {"a", expr_or_null(ri.a)}, {"b", expr_or_null(ri.b)}};
        }
        b["solution"] = expr_or_null(c.solution);
        b["verified"] = {{"determining", c.verified_determining},
                         {"solution", c.verified_solution},
                         {"probabilistic", c.probabilistic}};
        if (!c.failed_condition.empty()) b["note"] = c.failed_condition;
        j["branches"].push_back(std::move(b));
    }
    if (!rep.error.empty()) j["error"] = rep.error;
    if (rep.expect_present) {
        j["expect"] = {{"ok", rep.expect_ok}, {"notes", rep.expect_notes}};
    }
    j["seed"] = rep.options.seed;
    j["probes"] = rep.options.probes;
    j["tol"] = rep.options.tol;
    j["integrate_call_sites"] = rep.integrate_sites;
    if (rep.cross_checks > 0) {
        j["cross_checks"] = rep.cross_checks;
        j["contradictions"] = rep.contradictions;
    }
    j["ms"] = rep.ms;
    return j;
}

}  // namespace symline
