#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "coco/composition.hpp"

using namespace coco;

TEST_CASE("product matches pinned examples") {
    CHECK(product({0.9, 0.8}) == doctest::Approx(0.72));
    CHECK(product({1.0, 0.37}) == doctest::Approx(0.37));
    CHECK(product({0.0, 0.9}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(product({}), Error);
}

TEST_CASE("power_product matches pinned examples") {
    CHECK(power_product({0.9, 0.8}) == doctest::Approx(0.5184));
    CHECK(power_product({1.0, 1.0}) == doctest::Approx(1.0));
    CHECK(power_product({0.7}) == doctest::Approx(0.7));
    CHECK_THROWS_AS(power_product({}), Error);
}

TEST_CASE("inverse variance weights match pinned examples") {
    auto w = inverse_variance_weights({0.04, 0.01});
    CHECK(w.weights[0] == doctest::Approx(0.2));
    CHECK(w.weights[1] == doctest::Approx(0.8));

    auto eq = inverse_variance_weights({0.03, 0.03});
    CHECK(eq.weights[0] == doctest::Approx(0.5));
    CHECK(eq.weights[1] == doctest::Approx(0.5));

    auto floored = inverse_variance_weights({0.04, 0.0});
    CHECK(floored.weights[0] == doctest::Approx(2.5e-5).epsilon(1e-3));
    CHECK(floored.weights[1] == doctest::Approx(0.999975).epsilon(1e-6));

    double sum = 0.0;
    for (double x : floored.weights) sum += x;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("weighted average matches pinned examples") {
    CHECK(weighted_average({0.5, 1.0}, {{0.2, 0.8}}) == doctest::Approx(0.9));
    CHECK(weighted_average({0.4, 0.4}, {{0.3, 0.7}}) == doctest::Approx(0.4));
    CHECK(weighted_average({0.6, 0.1}, {{1.0, 0.0}}) == doctest::Approx(0.6));
    CHECK_THROWS_AS(weighted_average({0.5}, {{0.5, 0.5}}), Error);
}

TEST_CASE("weighted average is permutation invariant") {
    CHECK(weighted_average({0.2, 0.9}, {{0.3, 0.7}}) ==
          doctest::Approx(weighted_average({0.9, 0.2}, {{0.7, 0.3}})));
}

TEST_CASE("power <= product <= weighted average on random inputs") {
    std::mt19937_64 rng(606);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 10000; ++rep) {
        std::vector<double> ms{u(rng), u(rng)};
        auto w = inverse_variance_weights({0.001 + u(rng), 0.001 + u(rng)});
        double pw = power_product(ms);
        double pr = product(ms);
        double wa = weighted_average(ms, w);
        CHECK(pw <= pr);
        CHECK(pr <= wa);
        CHECK(pr <= std::min(ms[0], ms[1]));
    }
}

TEST_CASE("logreg with zero parameters outputs one half") {
    LogRegParams p;
    p.coefficients = {0.0, 0.0};
    CHECK(logreg_apply(p, {0.3, 0.9}) == doctest::Approx(0.5));
}

TEST_CASE("logreg recovers generator parameters") {
    std::mt19937_64 rng(7777);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t n = 50000;
    std::vector<std::vector<double>> rows;
    std::vector<bool> labels;
    for (std::size_t i = 0; i < n; ++i) {
        double m1 = u(rng), m2 = u(rng);
        double p = 1.0 / (1.0 + std::exp(-(-2.0 + 3.0 * m1 + 1.0 * m2)));
        rows.push_back({m1, m2});
        labels.push_back(u(rng) < p);
    }
    auto fit = logreg_fit(rows, labels, 0.5);
    CHECK(fit.intercept == doctest::Approx(-2.0).epsilon(0.1));
    CHECK(fit.coefficients[0] == doctest::Approx(3.0).epsilon(0.067));
    CHECK(fit.coefficients[1] == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("logreg rejects single-class labels") {
    std::vector<std::vector<double>> rows{{0.1, 0.2}, {0.3, 0.4}};
    std::vector<bool> labels{true, true};
    CHECK_THROWS_AS(logreg_fit(rows, labels, 0.5), FitError);
}

TEST_CASE("logreg is monotone in positively weighted features") {
    LogRegParams p;
    p.intercept = -1.0;
    p.coefficients = {2.0, 0.5};
    double prev = -1.0;
    for (double m = 0.0; m <= 1.0; m += 0.05) {
        double v = logreg_apply(p, {m, 0.5});
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("logreg params serialize to json and back") {
    LogRegParams p;
    p.intercept = 0.75;
    p.coefficients = {1.5, -0.25};
    p.lambda = 0.8;
    auto q = LogRegParams::from_json(p.to_json());
    CHECK(q.intercept == doctest::Approx(p.intercept));
    CHECK(q.coefficients.size() == 2);
    CHECK(q.coefficients[1] == doctest::Approx(-0.25));
    CHECK(q.lambda == doctest::Approx(0.8));
}

TEST_CASE("bayes_step follows the likelihood ratio") {
    // A histogram with a single dimension where low cells favor the negative
    // class and high cells the positive class.
    std::vector<std::vector<double>> rows;
    std::vector<bool> labels;
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 20000; ++i) {
        double m = u(rng);
        rows.push_back({m});
        labels.push_back(u(rng) < m);
    }
    auto hist = bayes_fit(rows, labels, 10, 1.0);

    double up = bayes_step(hist, 0.5, {0.95});
    double down = bayes_step(hist, 0.5, {0.05});
    CHECK(up > 0.5);
    CHECK(down < 0.5);
    CHECK(bayes_step(hist, 0.0, {0.95}) == doctest::Approx(0.0));  // absorbing prior
}

TEST_CASE("bayes_step is multiplicative absent clamping") {
    std::vector<std::vector<double>> rows;
    std::vector<bool> labels;
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 5000; ++i) {
        double m = u(rng);
        rows.push_back({m});
        labels.push_back(u(rng) < m);
    }
    auto hist = bayes_fit(rows, labels, 10, 1.0);

    double f0 = 0.01;  // small start so two upward ratios stay below 1
    double r1 = hist.likelihood_ratio({0.62});
    double r2 = hist.likelihood_ratio({0.81});
    double sequential = bayes_step(hist, bayes_step(hist, f0, {0.62}), {0.81});
    CHECK(sequential == doctest::Approx(f0 * r1 * r2).epsilon(1e-12));
}

TEST_CASE("bayes output stays in the unit interval") {
    std::vector<std::vector<double>> rows{{0.9}, {0.9}, {0.1}, {0.1}};
    std::vector<bool> labels{true, true, false, false};
    auto hist = bayes_fit(rows, labels, 5, 1.0);
    double f = 0.9;
    for (int i = 0; i < 20; ++i) {
        f = bayes_step(hist, f, {0.9});
        CHECK(f >= 0.0);
        CHECK(f <= 1.0);
    }
}

TEST_CASE("likelihood ratio is clamped") {
    std::vector<std::vector<double>> rows{{0.05}, {0.95}};
    std::vector<bool> labels{false, true};
    auto hist = bayes_fit(rows, labels, 10, 1.0);
    for (double m = 0.0; m <= 1.0; m += 0.1) {
        double r = hist.likelihood_ratio({m});
        CHECK(r >= JointHistogram::kRatioFloor);
        CHECK(r <= JointHistogram::kRatioCap);
    }
}

TEST_CASE("joint histogram serializes to json and back") {
    std::vector<std::vector<double>> rows{{0.1, 0.9}, {0.4, 0.6}, {0.8, 0.2}};
    std::vector<bool> labels{false, true, true};
    auto hist = bayes_fit(rows, labels, 4, 1.0);
    auto back = JointHistogram::from_json(hist.to_json());
    CHECK(back.dims() == 2);
    CHECK(back.bins_per_dim() == 4);
    for (double a = 0.05; a < 1.0; a += 0.3)
        for (double b = 0.05; b < 1.0; b += 0.3)
            CHECK(back.likelihood_ratio({a, b}) ==
                  doctest::Approx(hist.likelihood_ratio({a, b})).epsilon(1e-12));
}
