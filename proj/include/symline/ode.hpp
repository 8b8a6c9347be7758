#pragma once

// Shared solver-facing types: the ODE in solved form, linear symmetries,
// reduction records and the classification result every pipeline stage
// contributes to.

#include "symline/probe.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace symline {

// y' = phi(x, y) with declared parameter and arbitrary-function names
struct Ode {
    Expr phi;
    std::set<std::string> params;
    std::set<std::string> funcs;
};

// infinitesimals [xi(x), eta = P(x) y + Q(x)]
struct LinearSymmetry {
    Expr xi;
    Expr eta;
};

// one change of variables u = forward(x, y), y = inverse(x, u) performed
// during classification; `kind` names the case rule that produced it
struct ReductionStep {
    std::string kind;
    Expr forward;
    Expr inverse;  // with the new variable written as y
};

enum class Outcome {
    CaseAy0,
    CaseAyy0,
    CaseGeneral,
    FxQxDirect,
    RiccatiSolved,
    NotInClass,
    DegenerateLinear,
    DegenerateRiccatiPath,
};

inline const char* outcome_name(Outcome o) {
    switch (o) {
        case Outcome::CaseAy0: return "CaseAy0";
        case Outcome::CaseAyy0: return "CaseAyy0";
        case Outcome::CaseGeneral: return "CaseGeneral";
        case Outcome::FxQxDirect: return "FxQxDirect";
        case Outcome::RiccatiSolved: return "RiccatiSolved";
        case Outcome::NotInClass: return "NotInClass";
        case Outcome::DegenerateLinear: return "DegenerateLinear";
        case Outcome::DegenerateRiccatiPath: return "DegenerateRiccatiPath";
    }
    return "?";
}

// substitution u = p*y + q used to push the quadrature of the solution
// through the change of variables
struct LinearHint {
    Expr p;
    Expr q;
};

struct RiccatiInfo {
    Expr s2, s3, s4, chini;
    int step = 0;  // strategy step that resolved the ODE, 0 if none
    std::string family;
    std::optional<Expr> a, b;
};

// intermediate Theorem-1 artifacts, kept for reporting and tests
struct TheoremTrace {
    std::optional<Expr> A, I, p, q, reduced_phi;
};

struct Classification {
    Outcome outcome = Outcome::NotInClass;
    std::string case_label;
    std::vector<ReductionStep> reduction;
    std::optional<LinearSymmetry> symmetry;
    std::optional<RiccatiInfo> riccati;
    std::optional<Expr> solution;  // implicit: solution = C1
    bool verified_determining = false;
    bool verified_solution = false;
    bool probabilistic = false;
    std::string failed_condition;  // named failed test for NotInClass, notes otherwise
    std::optional<LinearHint> hint;
    TheoremTrace trace;
};

// replace a semantically v-free expression that still mentions v textually
// by its value at a fixed anchor; anchors that land on a pole (0^negative
// while folding) are skipped
inline Expr scrub_symbol(const Expr& e, const std::string& v, Session& session) {
    if (!contains_symbol(e, v)) return e;
    if (!is_free_of(e, v, session)) return e;
    for (long anchor : {1L, 2L, 3L, 5L}) {
        try {
            return substitute(e, v, num(anchor));
        } catch (const MathError&) {
            // pole at this anchor; try the next one
        }
    }
    return e;
}

}  // namespace symline
