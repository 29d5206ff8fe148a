#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "coco/bounds.hpp"
#include "coco/metrics.hpp"

using namespace coco;

TEST_CASE("safety bound matches pinned examples") {
    CHECK(safety_bound(0.0, 0.0) == doctest::Approx(0.0));
    CHECK(safety_bound(0.05, 0.1) == doctest::Approx(0.15));
    CHECK(safety_bound(0.7, 0.7) == doctest::Approx(1.0));
    CHECK_THROWS_AS(safety_bound(-0.1, 0.5), RangeError);
    CHECK_THROWS_AS(safety_bound(0.5, 1.2), RangeError);
}

TEST_CASE("lemma interval matches pinned examples") {
    auto [lo1, hi1] = lemma_interval(0.5, 0.1);
    CHECK(lo1 == doctest::Approx(0.4));
    CHECK(hi1 == doctest::Approx(0.6));
    auto [lo2, hi2] = lemma_interval(0.05, 0.1);
    CHECK(lo2 == doctest::Approx(0.0));
    CHECK(hi2 == doctest::Approx(0.15));
    auto [lo3, hi3] = lemma_interval(0.98, 0.1);
    CHECK(lo3 == doctest::Approx(0.88));
    CHECK(hi3 == doctest::Approx(1.0));
}

TEST_CASE("product ece bound matches pinned examples") {
    CHECK(ece_product_bound({0.1, 0.04}, {0.1, 0.04}).value == doctest::Approx(0.25));
    CHECK(ece_product_bound({0.0, 0.0}, {0.0, 0.0}).value == doctest::Approx(0.0));

    auto vac = ece_product_bound({0.5, 0.0}, {0.5, 0.0});
    CHECK(vac.value == doctest::Approx(1.25));
    CHECK(vac.vacuous);
    CHECK_FALSE(ece_product_bound({0.1, 0.04}, {0.1, 0.04}).vacuous);
}

TEST_CASE("perfect monitors leave only the variance term") {
    for (double v1 : {0.0, 0.01, 0.25})
        for (double v2 : {0.0, 0.04, 0.2})
            CHECK(ece_product_bound({0.0, v1}, {0.0, v2}).value ==
                  doctest::Approx(std::sqrt(v1 * v2)));
}

TEST_CASE("weighted ece bound matches pinned examples") {
    CHECK(ece_weighted_bound(0.1, 0.1, 0.5, 0.5).value == doctest::Approx(0.69));
    CHECK(ece_weighted_bound(0.0, 0.0, 0.5, 0.5).value == doctest::Approx(0.5));
    CHECK(ece_weighted_bound(0.0, 0.0, 1.0, 0.0).value == doctest::Approx(1.0));
    CHECK_THROWS_AS(ece_weighted_bound(0.1, 0.1, 0.6, 0.6), RangeError);
}

TEST_CASE("pointwise cce bound matches pinned examples") {
    CHECK(cce_product_pointwise(0.5, 0.1, 0.2) == doctest::Approx(0.12));
    CHECK(cce_product_pointwise(0.05, 0.1, 0.2) == doctest::Approx(0.0));
    CHECK(cce_product_pointwise(1.0, 0.0, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("corollary cce bound matches pinned examples") {
    CHECK(cce_product_bound(0.0, 0.0).value == doctest::Approx(0.25));
    CHECK(cce_product_bound(0.1, 0.2).value == doctest::Approx(0.4025));
    CHECK(cce_product_bound(1.0, 1.0).value == doctest::Approx(1.0));
}

TEST_CASE("corollary equals the maximized pointwise deficit") {
    for (double e1 = 0.0; e1 <= 1.0; e1 += 0.1)
        for (double e2 = 0.0; e2 <= 1.0; e2 += 0.1) {
            double worst = 0.0;
            for (int i = 0; i <= 20000; ++i) {
                double x = i / 20000.0;
                worst = std::max(worst, x - cce_product_pointwise(x, e1, e2));
            }
            CAPTURE(e1);
            CAPTURE(e2);
            CHECK(cce_product_bound(e1, e2).value == doctest::Approx(worst).epsilon(1e-7));
        }
}

TEST_CASE("end-to-end bounds match pinned examples") {
    CHECK(ece_end_to_end(0.05, 0.05, 0.1) == doctest::Approx(0.2));
    CHECK(ece_end_to_end(0.0, 0.0, 0.0) == doctest::Approx(0.0));
    CHECK(ece_end_to_end(0.5, 0.5, 0.5) == doctest::Approx(1.0));  // capped
    CHECK(cce_end_to_end(0.3) == doctest::Approx(0.3));
}

TEST_CASE("bounds are monotone in every error argument") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 0.9);
    for (int rep = 0; rep < 200; ++rep) {
        double e1 = u(rng), e2 = u(rng), bump = 0.05;
        CHECK(ece_product_bound({e1 + bump, 0.02}, {e2, 0.02}).value >=
              ece_product_bound({e1, 0.02}, {e2, 0.02}).value);
        CHECK(ece_weighted_bound(e1 + bump, e2, 0.5, 0.5).value >=
              ece_weighted_bound(e1, e2, 0.5, 0.5).value);
        CHECK(cce_product_bound(e1 + bump, e2).value >= cce_product_bound(e1, e2).value);
        CHECK(safety_bound(std::min(1.0, e1 + bump), e2) >= safety_bound(e1, e2));
    }
}

TEST_CASE("synthetic space generation is deterministic and well-formed") {
    SyntheticSpace space;
    space.sample_count = 5000;
    space.seed = {77, 1};
    auto s1 = generate_space(space);
    auto s2 = generate_space(space);
    CHECK(s1.m1 == s2.m1);
    CHECK(s1.a2 == s2.a2);
    REQUIRE(s1.m1.size() == 5000);
    for (double m : s1.m1) {
        CHECK(m >= 0.0);
        CHECK(m <= 1.0);
    }
}

TEST_CASE("zero-bias spaces produce calibrated monitors") {
    SyntheticSpace space;
    space.sample_count = 50000;
    space.seed = {5, 2};
    auto s = generate_space(space);
    auto b = Binning::uniform(10);
    CHECK(ece_hat(s.m1, s.a1, b) < 0.02);
    CHECK(mce_hat(s.m2, s.a2, b) < 0.05);
}

TEST_CASE("biased spaces realize a nonzero measured mce") {
    SyntheticSpace space;
    space.bias1 = 0.12;
    space.sample_count = 50000;
    space.seed = {5, 3};
    auto s = generate_space(space);
    CHECK(mce_hat(s.m1, s.a1, Binning::uniform(10)) > 0.05);
}

TEST_CASE("empirical verification passes on a compliant space") {
    SyntheticSpace space;
    space.sample_count = 30000;
    space.seed = {9, 4};
    for (const char* bound : {"ece_product", "cce_product", "ece_weighted"}) {
        auto report = verify_bound_empirically(
            space, std::string(bound) == "ece_weighted" ? "weighted" : "product", bound, 10, 50);
        CAPTURE(bound);
        CHECK(report.preconditions_ok);
        CHECK(report.pass);
        CHECK(report.measured <= report.bound_value + report.slack);
    }
}

TEST_CASE("verification report serializes to json") {
    SyntheticSpace space;
    space.sample_count = 10000;
    space.seed = {9, 5};
    auto report = verify_bound_empirically(space, "product", "ece_product", 10, 20);
    auto text = report.to_json();
    CHECK(text.find("\"bound\"") != std::string::npos);
    CHECK(text.find("ece_product") != std::string::npos);
}
