#pragma once

// Recursive-descent parser for the expression grammar: +, -, *, /, ^ with the
// usual precedence, right-associative ^, unary minus, name(expr) calls, and the
// reserved forms Int(h, v) / IntTo(h, z, u). y' is only legal in ODE statements.

#include "symline/expr.hpp"

#include <cctype>
#include <set>
#include <string>
#include <utility>

namespace symline {

struct SyntaxError : std::runtime_error {
    size_t position;
    SyntaxError(size_t pos, const std::string& msg)
        : std::runtime_error("syntax error at position " + std::to_string(pos) + ": " + msg), position(pos) {}
};

struct UnknownIdentifier : std::runtime_error {
    explicit UnknownIdentifier(const std::string& name, size_t pos)
        : std::runtime_error("unknown identifier '" + name + "' at position " + std::to_string(pos)) {}
};

struct ParseOptions {
    std::set<std::string> params;
    std::set<std::string> funcs;
    bool allow_yprime = false;
    std::string indep = "x";
    std::string dep = "y";
};

// The dependent-derivative token in ODE statements parses to this symbol name.
inline const std::string& yprime_name() {
    static std::string n = "y'";
    return n;
}

namespace detail {

class Parser {
  public:
    Parser(std::string text, ParseOptions opt) : text_(std::move(text)), opt_(std::move(opt)) {}

    Expr parse_full() {
        Expr e = parse_sum();
        skip_ws();
        if (pos_ != text_.size()) throw SyntaxError(pos_, "unexpected trailing input");
        return e;
    }

  private:
    std::string text_;
    ParseOptions opt_;
    size_t pos_ = 0;
    bool collect_unknown_ = false;
    std::set<std::string>* unknown_ = nullptr;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    void expect(char c) {
        if (!eat(c)) throw SyntaxError(pos_, std::string("expected '") + c + "'");
    }

    Expr parse_sum() {
        Expr e = parse_term();
        for (;;) {
            if (eat('+')) e = add(e, parse_term());
            else if (eat('-')) e = sub(e, parse_term());
            else return e;
        }
    }

    Expr parse_term() {
        Expr e = parse_unary();
        for (;;) {
            if (eat('*')) e = mul(e, parse_unary());
            else if (eat('/')) e = div(e, parse_unary());
            else return e;
        }
    }

    Expr parse_unary() {
        if (eat('-')) return neg(parse_unary());
        if (eat('+')) return parse_unary();
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_atom();
        if (eat('^')) return pow(base, parse_unary());
        return base;
    }

    Expr parse_atom() {
        skip_ws();
        if (pos_ >= text_.size()) throw SyntaxError(pos_, "expected expression");
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = parse_sum();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        throw SyntaxError(pos_, "expected number, identifier or '('");
    }

    Expr parse_number() {
        size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        BigInt intpart = 0;
        if (pos_ > start) intpart = BigInt(text_.substr(start, pos_ - start));
        Rat value(intpart);
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            size_t fs = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            if (pos_ == fs && pos_ == start + 1) throw SyntaxError(start, "malformed number");
            if (pos_ > fs) {
                BigInt frac(text_.substr(fs, pos_ - fs));
                value += Rat(frac, big_pow(10, static_cast<unsigned long>(pos_ - fs)));
            }
        }
        return num(value);
    }

    Expr parse_identifier() {
        size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string name = text_.substr(start, pos_ - start);
        int primes = 0;
        while (pos_ < text_.size() && text_[pos_] == '\'') {
            ++primes;
            ++pos_;
        }
        if (name == "Int") {
            if (primes) throw SyntaxError(start, "Int cannot carry derivative marks");
            expect('(');
            auto [h, unknowns] = parse_with_unknowns();
            expect(',');
            std::string v = parse_plain_name();
            expect(')');
            check_unknowns(unknowns, v, start);
            return integral(h, v);
        }
        if (name == "IntTo") {
            if (primes) throw SyntaxError(start, "IntTo cannot carry derivative marks");
            expect('(');
            auto [h, unknowns] = parse_with_unknowns();
            expect(',');
            std::string z = parse_plain_name();
            expect(',');
            Expr u = parse_sum();
            expect(')');
            check_unknowns(unknowns, z, start);
            return integral_to(h, z, u);
        }
        static const std::map<std::string, ElemFn> elems = {
            {"exp", ElemFn::Exp}, {"ln", ElemFn::Ln},   {"sin", ElemFn::Sin},
            {"cos", ElemFn::Cos}, {"tan", ElemFn::Tan}, {"arctan", ElemFn::Arctan}};
        if (name == "sqrt") {
            if (primes) throw SyntaxError(start, "sqrt cannot carry derivative marks");
            expect('(');
            Expr a = parse_sum();
            expect(')');
            return sqrt_expr(a);
        }
        if (auto it = elems.find(name); it != elems.end()) {
            if (primes) throw SyntaxError(start, "elementary functions cannot carry derivative marks");
            expect('(');
            Expr a = parse_sum();
            expect(')');
            return elem(it->second, a);
        }
        if (opt_.funcs.count(name)) {
            expect('(');
            Expr a = parse_sum();
            expect(')');
            return fun(name, a, primes);
        }
        if (primes) {
            if (opt_.allow_yprime && name == opt_.dep && primes == 1) return sym(yprime_name());
            throw SyntaxError(start, "derivative mark on non-function identifier '" + name + "'");
        }
        if (name == opt_.indep || name == opt_.dep) return sym(name);
        if (opt_.params.count(name)) return par(name);
        if (collect_unknown_) {
            unknown_->insert(name);
            return sym(name);
        }
        throw UnknownIdentifier(name, start);
    }

    // an integrand may reference its (yet unread) bound dummy
    std::pair<Expr, std::set<std::string>> parse_with_unknowns() {
        bool saved = collect_unknown_;
        std::set<std::string>* saved_set = unknown_;
        std::set<std::string> local;
        collect_unknown_ = true;
        unknown_ = &local;
        Expr e = parse_sum();
        collect_unknown_ = saved;
        unknown_ = saved_set;
        return {e, local};
    }

    void check_unknowns(const std::set<std::string>& unknowns, const std::string& dummy, size_t pos) {
        for (auto& n : unknowns) {
            if (n == dummy) continue;
            if (collect_unknown_ && unknown_) {
                unknown_->insert(n);  // defer to the enclosing binder
                continue;
            }
            throw UnknownIdentifier(n, pos);
        }
    }

    std::string parse_plain_name() {
        skip_ws();
        size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        if (pos_ == start) throw SyntaxError(pos_, "expected variable name");
        return text_.substr(start, pos_ - start);
    }
};

}  // namespace detail

inline Expr parse(const std::string& text, const std::set<std::string>& params = {},
                  const std::set<std::string>& funcs = {}) {
    ParseOptions opt;
    opt.params = params;
    opt.funcs = funcs;
    return detail::Parser(text, opt).parse_full();
}

inline Expr parse(const std::string& text, const ParseOptions& opt) {
    return detail::Parser(text, opt).parse_full();
}

}  // namespace symline
