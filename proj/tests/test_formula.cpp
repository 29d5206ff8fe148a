#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "coco/composition.hpp"
#include "coco/formula.hpp"

using namespace coco;

namespace {

// Exact P(f) for independent Bernoulli variables: enumerate all assignments.
double brute_force_probability(const FormulaPtr& f, const std::vector<double>& marginals) {
    int n = static_cast<int>(marginals.size());
    double total = 0.0;
    for (int mask = 0; mask < (1 << n); ++mask) {
        std::vector<bool> assignment(n);
        double weight = 1.0;
        for (int i = 0; i < n; ++i) {
            assignment[i] = (mask >> i) & 1;
            weight *= assignment[i] ? marginals[i] : 1.0 - marginals[i];
        }
        if (f->eval(assignment)) total += weight;
    }
    return total;
}

double eval_product(const FormulaPtr& f, const std::vector<double>& ms) {
    return evaluate(compile_formula(f), ms, ConjComposer(product)).value();
}

// Formula templates over up to 3 variables, nesting depth up to 4.
const std::vector<std::string> kTemplates = {
    "A1",
    "!A1",
    "A1 & A2",
    "A1 | A2",
    "A1 -> A2",
    "!(A1 & A2)",
    "!(A1 | A2)",
    "A1 & !A2",
    "!A1 | !A2",
    "A1 | A2 | A3",
    "A1 & A2 & A3",
    "A1 & (A2 | A3)",
    "(A1 & A2) | A3",
    "(A1 | A2) & (A2 | A3)",
    "(A1 -> A2) -> A3",
    "A1 -> (A2 -> A3)",
    "!(A1 -> !(A2 | A3))",
    "(A1 & !A2) | (!A1 & A2)",
    "((A1 | A2) & !A3) | (A3 & A1)",
    "!( !(A1 & A2) | !A3 )",
};

}  // namespace

TEST_CASE("parser produces expected shapes") {
    auto f = parse_formula("A1 & A2");
    CHECK(f->kind == PropFormula::Kind::And);
    CHECK(f->lhs->var == 0);
    CHECK(f->rhs->var == 1);

    auto g = parse_formula("A1 -> A2 -> A3");
    CHECK(g->kind == PropFormula::Kind::Implies);
    CHECK(g->lhs->var == 0);
    CHECK(g->rhs->kind == PropFormula::Kind::Implies);  // right-associative

    auto h = parse_formula("!A1 | A2 & A3");  // precedence: ! > & > |
    CHECK(h->kind == PropFormula::Kind::Or);
    CHECK(h->lhs->kind == PropFormula::Kind::Not);
    CHECK(h->rhs->kind == PropFormula::Kind::And);
}

TEST_CASE("parser reports error positions") {
    try {
        parse_formula("A1 &");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& err) {
        CHECK(err.pos == 4);
    }
    CHECK_THROWS_AS(parse_formula("B1"), SyntaxError);
    CHECK_THROWS_AS(parse_formula("(A1 & A2"), SyntaxError);
    CHECK_THROWS_AS(parse_formula(""), SyntaxError);
}

TEST_CASE("parser ignores whitespace") {
    auto a = parse_formula("A1&A2|!A3");
    auto b = parse_formula("  A1 &  A2 |  ! A3 ");
    CHECK(a->to_string() == b->to_string());
}

TEST_CASE("to_dnf preserves truth tables on the template set") {
    for (const auto& text : kTemplates) {
        auto f = parse_formula(text);
        auto dnf = to_dnf(f);
        int n = f->max_var() + 1;
        for (int mask = 0; mask < (1 << n); ++mask) {
            std::vector<bool> assignment(n);
            for (int i = 0; i < n; ++i) assignment[i] = (mask >> i) & 1;
            CAPTURE(text);
            CAPTURE(mask);
            CHECK(f->eval(assignment) == dnf->eval(assignment));
        }
    }
}

TEST_CASE("to_dnf handles the spec identities") {
    auto check_equiv = [](const std::string& a, const std::string& b) {
        auto fa = to_dnf(parse_formula(a));
        auto fb = parse_formula(b);
        int n = std::max(fa->max_var(), fb->max_var()) + 1;
        for (int mask = 0; mask < (1 << n); ++mask) {
            std::vector<bool> assignment(n);
            for (int i = 0; i < n; ++i) assignment[i] = (mask >> i) & 1;
            CHECK(fa->eval(assignment) == fb->eval(assignment));
        }
    };
    check_equiv("!(A1 | A2)", "!A1 & !A2");
    check_equiv("A1 -> A2", "!A1 | A2");
    check_equiv("A1 & (A2 | A3)", "(A1 & A2) | (A1 & A3)");
}

TEST_CASE("compiled expressions match pinned evaluations") {
    std::vector<double> half{0.5, 0.5};
    CHECK(eval_product(parse_formula("A1 | A2"), half) == doctest::Approx(0.75));
    CHECK(eval_product(parse_formula("!A1"), {0.3, 0.0}) == doctest::Approx(0.7));
    CHECK(eval_product(parse_formula("A1 & A2"), {0.9, 0.8}) == doctest::Approx(0.72));
    CHECK(eval_product(parse_formula("A1 & A1"), {0.9}) == doctest::Approx(0.9));  // dedupe
}

TEST_CASE("compiled expressions equal brute-force enumeration") {
    std::mt19937_64 rng(20240817);
    std::uniform_real_distribution<double> u(0.02, 0.98);
    for (const auto& text : kTemplates) {
        auto f = parse_formula(text);
        int n = f->max_var() + 1;
        for (int rep = 0; rep < 25; ++rep) {
            std::vector<double> ms(n);
            for (auto& m : ms) m = u(rng);
            double expected = brute_force_probability(f, ms);
            CAPTURE(text);
            CHECK(eval_product(f, ms) == doctest::Approx(expected).epsilon(1e-9));
        }
    }
}

TEST_CASE("variable limit is enforced") {
    auto f = parse_formula("A1 | A2 | A3 | A4 | A5 | A6 | A7");
    CHECK_THROWS_AS(compile_formula(f), Error);
    CHECK_NOTHROW(compile_formula(f, 7));
}

TEST_CASE("evaluate requires enough monitor values") {
    auto expr = compile_formula(parse_formula("A1 & A3"));
    CHECK_THROWS_AS(evaluate(expr, {0.5, 0.5}, ConjComposer(product)), Error);
}

TEST_CASE("evaluation result is clamped to the unit interval") {
    // An adversarial composer pushing inclusion-exclusion out of [0,1].
    ConjComposer overshoot = [](const std::vector<double>&) { return 1.0; };
    auto expr = compile_formula(parse_formula("A1 | A2"));
    double v = evaluate(expr, {0.05, 0.05}, overshoot).value();
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
}

TEST_CASE("indexed composer receives conjunction member indices") {
    std::vector<std::vector<int>> seen;
    IndexedConjComposer record = [&](const std::vector<int>& idx,
                                     const std::vector<double>& vals) {
        seen.push_back(idx);
        return product(vals);
    };
    auto expr = compile_formula(parse_formula("A1 & A3"));
    evaluate(expr, {0.5, 0.0, 0.5}, record);
    REQUIRE(seen.size() == 1);
    CHECK(seen[0] == std::vector<int>{0, 2});
}

TEST_CASE("conjunction passthrough is monotone under product") {
    auto f = parse_formula("A1 & A2 & A3");
    std::vector<double> base{0.3, 0.5, 0.7};
    double v0 = eval_product(f, base);
    for (int i = 0; i < 3; ++i) {
        auto raised = base;
        raised[i] += 0.2;
        CHECK(eval_product(f, raised) >= v0);
    }
}
