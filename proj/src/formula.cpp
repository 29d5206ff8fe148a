#include "coco/formula.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

namespace coco {

using Kind = PropFormula::Kind;

namespace {

FormulaPtr node(Kind k, int var, FormulaPtr a, FormulaPtr b) {
    auto f = std::make_shared<PropFormula>();
    f->kind = k;
    f->var = var;
    f->lhs = std::move(a);
    f->rhs = std::move(b);
    return f;
}

}  // namespace

FormulaPtr PropFormula::make_var(int index) {
    if (index < 0) throw Error("variable index must be non-negative");
    return node(Kind::Var, index, nullptr, nullptr);
}
FormulaPtr PropFormula::make_not(FormulaPtr f) { return node(Kind::Not, -1, std::move(f), nullptr); }
FormulaPtr PropFormula::make_and(FormulaPtr a, FormulaPtr b) {
    return node(Kind::And, -1, std::move(a), std::move(b));
}
FormulaPtr PropFormula::make_or(FormulaPtr a, FormulaPtr b) {
    return node(Kind::Or, -1, std::move(a), std::move(b));
}
FormulaPtr PropFormula::make_implies(FormulaPtr a, FormulaPtr b) {
    return node(Kind::Implies, -1, std::move(a), std::move(b));
}

int PropFormula::max_var() const {
    switch (kind) {
        case Kind::Var: return var;
        case Kind::Not: return lhs->max_var();
        default: return std::max(lhs->max_var(), rhs->max_var());
    }
}

bool PropFormula::eval(const std::vector<bool>& a) const {
    switch (kind) {
        case Kind::Var:
            if (var >= static_cast<int>(a.size())) throw Error("assignment too short");
            return a[var];
        case Kind::Not: return !lhs->eval(a);
        case Kind::And: return lhs->eval(a) && rhs->eval(a);
        case Kind::Or: return lhs->eval(a) || rhs->eval(a);
        case Kind::Implies: return !lhs->eval(a) || rhs->eval(a);
    }
    return false;
}

std::string PropFormula::to_string() const {
    switch (kind) {
        case Kind::Var: return "A" + std::to_string(var + 1);
        case Kind::Not: return "!" + lhs->to_string();
        case Kind::And: return "(" + lhs->to_string() + " & " + rhs->to_string() + ")";
        case Kind::Or: return "(" + lhs->to_string() + " | " + rhs->to_string() + ")";
        case Kind::Implies: return "(" + lhs->to_string() + " -> " + rhs->to_string() + ")";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Parser: recursive descent over  implies := or ('->' implies)?
//                                 or      := and ('|' and)*
//                                 and     := unary ('&' unary)*
//                                 unary   := '!' unary | '(' implies ')' | var

namespace {

class Parser {
  public:
    explicit Parser(const std::string& text) : text_(text) {}

    FormulaPtr parse() {
        auto f = implies();
        skip_ws();
        if (pos_ != text_.size()) throw SyntaxError("unexpected input", pos_);
        return f;
    }

  private:
    FormulaPtr implies() {
        auto lhs = disjunction();
        skip_ws();
        if (match("->")) return PropFormula::make_implies(lhs, implies());
        return lhs;
    }

    FormulaPtr disjunction() {
        auto f = conjunction();
        while (true) {
            skip_ws();
            // '|' but not part of '->' lookahead; single-char, no ambiguity
            if (!match("|")) return f;
            f = PropFormula::make_or(f, conjunction());
        }
    }

    FormulaPtr conjunction() {
        auto f = unary();
        while (true) {
            skip_ws();
            if (!match("&")) return f;
            f = PropFormula::make_and(f, unary());
        }
    }

    FormulaPtr unary() {
        skip_ws();
        if (match("!")) return PropFormula::make_not(unary());
        if (match("(")) {
            auto f = implies();
            skip_ws();
            if (!match(")")) throw SyntaxError("expected ')'", pos_);
            return f;
        }
        if (pos_ < text_.size() && text_[pos_] == 'A') {
            std::size_t start = pos_++;
            std::size_t digits = 0;
            int index = 0;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                index = index * 10 + (text_[pos_] - '0');
                ++pos_;
                ++digits;
            }
            if (digits == 0 || index == 0)
                throw SyntaxError("malformed variable name", start);
            return PropFormula::make_var(index - 1);
        }
        if (pos_ < text_.size() &&
            (std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
            throw SyntaxError("unknown variable '" + text_.substr(start, pos_ - start) + "'",
                              start);
        }
        throw SyntaxError("expected a formula", pos_);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool match(const std::string& tok) {
        skip_ws();
        if (text_.compare(pos_, tok.size(), tok) == 0) {
            pos_ += tok.size();
            return true;
        }
        return false;
    }

    const std::string& text_;
    std::size_t pos_ = 0;
};

}  // namespace

FormulaPtr parse_formula(const std::string& text) { return Parser(text).parse(); }

// ---------------------------------------------------------------------------
// DNF conversion

namespace {

// Negation normal form with implications eliminated.
FormulaPtr to_nnf(const FormulaPtr& f, bool negate) {
    switch (f->kind) {
        case Kind::Var:
            return negate ? PropFormula::make_not(f) : f;
        case Kind::Not:
            return to_nnf(f->lhs, !negate);
        case Kind::And:
            if (negate)
                return PropFormula::make_or(to_nnf(f->lhs, true), to_nnf(f->rhs, true));
            return PropFormula::make_and(to_nnf(f->lhs, false), to_nnf(f->rhs, false));
        case Kind::Or:
            if (negate)
                return PropFormula::make_and(to_nnf(f->lhs, true), to_nnf(f->rhs, true));
            return PropFormula::make_or(to_nnf(f->lhs, false), to_nnf(f->rhs, false));
        case Kind::Implies:
            // a -> b  ==  !a | b
            if (negate)
                return PropFormula::make_and(to_nnf(f->lhs, false), to_nnf(f->rhs, true));
            return PropFormula::make_or(to_nnf(f->lhs, true), to_nnf(f->rhs, false));
    }
    throw Error("unreachable");
}

FormulaPtr distribute(const FormulaPtr& f) {
    switch (f->kind) {
        case Kind::Var:
        case Kind::Not:
            return f;
        case Kind::Or:
            return PropFormula::make_or(distribute(f->lhs), distribute(f->rhs));
        case Kind::And: {
            auto a = distribute(f->lhs);
            auto b = distribute(f->rhs);
            if (a->kind == Kind::Or)
                return PropFormula::make_or(distribute(PropFormula::make_and(a->lhs, b)),
                                            distribute(PropFormula::make_and(a->rhs, b)));
            if (b->kind == Kind::Or)
                return PropFormula::make_or(distribute(PropFormula::make_and(a, b->lhs)),
                                            distribute(PropFormula::make_and(a, b->rhs)));
            return PropFormula::make_and(a, b);
        }
        case Kind::Implies:
            throw Error("implication survived NNF");
    }
    throw Error("unreachable");
}

}  // namespace

FormulaPtr to_dnf(const FormulaPtr& f) { return distribute(to_nnf(f, false)); }

// ---------------------------------------------------------------------------
// Compilation: DNF clauses + inclusion-exclusion

namespace {

// A clause maps variable index to literal sign; nullopt result = contradiction.
using Clause = std::map<int, bool>;

bool collect_literals(const FormulaPtr& f, Clause& clause) {
    if (f->kind == Kind::Var) {
        auto [it, inserted] = clause.emplace(f->var, true);
        return inserted || it->second;
    }
    if (f->kind == Kind::Not && f->lhs->kind == Kind::Var) {
        auto [it, inserted] = clause.emplace(f->lhs->var, false);
        return inserted || !it->second;
    }
    if (f->kind == Kind::And)
        return collect_literals(f->lhs, clause) && collect_literals(f->rhs, clause);
    throw Error("formula is not in DNF");
}

void collect_clauses(const FormulaPtr& f, std::vector<Clause>& out) {
    if (f->kind == Kind::Or) {
        collect_clauses(f->lhs, out);
        collect_clauses(f->rhs, out);
        return;
    }
    Clause c;
    if (collect_literals(f, c)) out.push_back(std::move(c));  // contradictions dropped
}

// c1 subset of c2 means c2 is absorbed by c1.
bool clause_subsumes(const Clause& c1, const Clause& c2) {
    for (const auto& [v, s] : c1) {
        auto it = c2.find(v);
        if (it == c2.end() || it->second != s) return false;
    }
    return true;
}

}  // namespace

CompositionExpr compile_formula(const FormulaPtr& f, int variable_limit) {
    if (f->max_var() + 1 > variable_limit)
        throw Error("formula uses " + std::to_string(f->max_var() + 1) +
                    " variables, exceeding the limit of " + std::to_string(variable_limit));

    std::vector<Clause> clauses;
    collect_clauses(to_dnf(f), clauses);

    // Dedupe and absorb before the exponential expansion.
    std::sort(clauses.begin(), clauses.end());
    clauses.erase(std::unique(clauses.begin(), clauses.end()), clauses.end());
    std::vector<Clause> kept;
    for (std::size_t i = 0; i < clauses.size(); ++i) {
        bool absorbed = false;
        for (std::size_t j = 0; j < clauses.size() && !absorbed; ++j)
            if (i != j && clause_subsumes(clauses[j], clauses[i]) && clauses[j].size() < clauses[i].size())
                absorbed = true;
        if (!absorbed) kept.push_back(clauses[i]);
    }
    if (kept.size() > 25)
        throw Error("inclusion-exclusion expansion too large (" +
                    std::to_string(kept.size()) + " DNF clauses)");

    // P(C1 or ... or Ck) = sum over nonempty S of (-1)^(|S|+1) P(merge(S)),
    // then P of a mixed-sign conjunction expands over its negated literals.
    std::map<std::vector<int>, double> coeffs;
    const std::size_t n = kept.size();
    for (std::size_t mask = 1; mask < (1ULL << n); ++mask) {
        Clause merged;
        bool contradiction = false;
        int bits = 0;
        for (std::size_t i = 0; i < n && !contradiction; ++i) {
            if (!(mask & (1ULL << i))) continue;
            ++bits;
            for (const auto& [v, s] : kept[i]) {
                auto [it, inserted] = merged.emplace(v, s);
                if (!inserted && it->second != s) {
                    contradiction = true;
                    break;
                }
            }
        }
        if (contradiction) continue;
        double sign = (bits % 2 == 1) ? 1.0 : -1.0;

        std::vector<int> pos, neg;
        for (const auto& [v, s] : merged) (s ? pos : neg).push_back(v);
        for (std::size_t t = 0; t < (1ULL << neg.size()); ++t) {
            std::vector<int> term = pos;
            int tb = 0;
            for (std::size_t i = 0; i < neg.size(); ++i)
                if (t & (1ULL << i)) {
                    term.push_back(neg[i]);
                    ++tb;
                }
            std::sort(term.begin(), term.end());
            coeffs[term] += sign * ((tb % 2 == 0) ? 1.0 : -1.0);
        }
    }

    CompositionExpr expr;
    expr.max_var = f->max_var();
    for (auto& [term, c] : coeffs) {
        if (std::abs(c) < 1e-12) continue;
        expr.terms.push_back({c, term});
    }
    return expr;
}

Confidence evaluate(const CompositionExpr& e, const std::vector<double>& ms,
                    const ConjComposer& conj) {
    return evaluate(e, ms,
                    IndexedConjComposer([&conj](const std::vector<int>&,
                                                const std::vector<double>& vals) {
                        return conj(vals);
                    }));
}

Confidence evaluate(const CompositionExpr& e, const std::vector<double>& ms,
                    const IndexedConjComposer& conj) {
    if (static_cast<int>(ms.size()) < e.max_var + 1)
        throw Error("missing monitor value: expression needs " +
                    std::to_string(e.max_var + 1) + " monitors, got " +
                    std::to_string(ms.size()));
    double total = 0.0;
    for (const auto& term : e.terms) {
        double v;
        if (term.conj.empty()) {
            v = 1.0;
        } else if (term.conj.size() == 1) {
            v = ms[term.conj[0]];
        } else {
            std::vector<double> args;
            args.reserve(term.conj.size());
            for (int i : term.conj) args.push_back(ms[i]);
            v = conj(term.conj, args);
        }
        total += term.coef * v;
    }
    return Confidence::clamped(total);
}

}  // namespace coco
