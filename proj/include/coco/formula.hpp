#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "coco/core.hpp"

namespace coco {

struct SyntaxError : Error {
    SyntaxError(const std::string& msg, std::size_t position)
        : Error(msg + " at position " + std::to_string(position)), pos(position) {}
    std::size_t pos;
};

// Propositional formula over assumption variables A1..An (0-based indices).
struct PropFormula {
    enum class Kind { Var, Not, And, Or, Implies };
    Kind kind = Kind::Var;
    int var = -1;  // Kind::Var only
    std::shared_ptr<const PropFormula> lhs, rhs;  // Not uses lhs only

    static std::shared_ptr<const PropFormula> make_var(int index);
    static std::shared_ptr<const PropFormula> make_not(std::shared_ptr<const PropFormula> f);
    static std::shared_ptr<const PropFormula> make_and(std::shared_ptr<const PropFormula> a,
                                                       std::shared_ptr<const PropFormula> b);
    static std::shared_ptr<const PropFormula> make_or(std::shared_ptr<const PropFormula> a,
                                                      std::shared_ptr<const PropFormula> b);
    static std::shared_ptr<const PropFormula> make_implies(std::shared_ptr<const PropFormula> a,
                                                           std::shared_ptr<const PropFormula> b);

    int max_var() const;
    bool eval(const std::vector<bool>& assignment) const;
    std::string to_string() const;
};

using FormulaPtr = std::shared_ptr<const PropFormula>;

// Grammar: variables A1..An, operators ! & | ->, parentheses.
// Precedence ! > & > | > ->, with -> right-associative.
FormulaPtr parse_formula(const std::string& text);

// Logically equivalent DNF: implications eliminated, negations pushed to
// literals, AND distributed over OR.
FormulaPtr to_dnf(const FormulaPtr& f);

// Compiled confidence-composition expression: a signed sum of conjunction
// terms over positive monitor indices. An empty index list is the constant 1,
// a single index is that monitor's value, larger lists are delegated to the
// conjunction composer at evaluation time.
struct CompositionExpr {
    struct Term {
        double coef = 0.0;
        std::vector<int> conj;  // sorted, deduplicated monitor indices
    };
    std::vector<Term> terms;
    int max_var = -1;
};

// Conjunction composer: maps the confidences of a positive-literal
// conjunction to a composed confidence. The indexed variant additionally
// receives the monitor indices, for composers with per-monitor parameters.
using ConjComposer = std::function<double(const std::vector<double>&)>;
using IndexedConjComposer =
    std::function<double(const std::vector<int>&, const std::vector<double>&)>;

// DNF conversion followed by inclusion-exclusion expansion until every
// probability is over an individual assumption or a positive conjunction.
// Negated literals inside conjunctions are rewritten via
// P(A and not B) = P(A) - P(A and B) before delegation.
CompositionExpr compile_formula(const FormulaPtr& f, int variable_limit = 6);

Confidence evaluate(const CompositionExpr& e, const std::vector<double>& monitor_values,
                    const ConjComposer& conj);
Confidence evaluate(const CompositionExpr& e, const std::vector<double>& monitor_values,
                    const IndexedConjComposer& conj);

}  // namespace coco
