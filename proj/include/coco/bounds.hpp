#pragma once

#include <string>
#include <vector>

#include "coco/core.hpp"

namespace coco {

// MCE bound and variance of a single monitor, as fed into the closed-form
// composition bounds.
struct MonitorErrorSpec {
    double e = 0.0;        // MCE(M_i, A_i) <= e
    double variance = 0.0;  // Var[M_i]
};

struct BoundResult {
    double value = 0.0;
    bool vacuous = false;  // expression exceeded 1; reported uncapped
};

// Safety chance under failed assumptions: min(1, e1 + e2).
double safety_bound(double e1, double e2);

// P(A_i | M_C) interval around E[M_i | M_C].
std::pair<double, double> lemma_interval(double exp_mi_given_mc, double e);

// ECE(M1 M2, A1 and A2) <= max[4 e1 e2, sqrt(Var1 Var2) + e1 + e2 + e1 e2].
BoundResult ece_product_bound(const MonitorErrorSpec& s1, const MonitorErrorSpec& s2);

// ECE(w1 M1 + w2 M2, A1 and A2) <=
//   max[e1 + e2 + e1 e2, max(w1, w2) + e1 + e2 - e1 e2].
BoundResult ece_weighted_bound(double e1, double e2, double w1, double w2);

// Pointwise conservatism floor: P(A1, A2 | M_C = x) >= max(0,x-e1) max(0,x-e2).
double cce_product_pointwise(double x, double e1, double e2);

// Piecewise CCE bound for the product composition.
BoundResult cce_product_bound(double e1, double e2);

// End-to-end bounds through safety relevance of model and assumptions.
double ece_end_to_end(double e1, double e2, double e3);
double cce_end_to_end(double e);

// Generator for a joint distribution over (A1, A2, M1, M2) satisfying the
// theorems' preconditions: M_i ~ Beta(alpha_i, beta_i) independently,
// A_i ~ Bernoulli(clip(M_i + bias_i)). Declared MCE bounds are measured on
// the generated sample rather than assumed.
struct SyntheticSpace {
    double alpha1 = 2.0, beta1 = 2.0, bias1 = 0.0;
    double alpha2 = 2.0, beta2 = 2.0, bias2 = 0.0;
    std::size_t sample_count = 100000;
    RngSeed seed;
};

struct SyntheticSample {
    std::vector<double> m1, m2;
    std::vector<bool> a1, a2;
};

SyntheticSample generate_space(const SyntheticSpace& space);

struct VerificationReport {
    std::string composition;  // "product" or "weighted"
    std::string bound;        // "ece_product", "ece_weighted", "cce_product"
    double measured = 0.0;    // measured ECE, or worst pointwise deficit for CCE
    double bound_value = 0.0;
    double sigma = 0.0;  // bootstrap std of the measured quantity
    double slack = 0.0;  // 3 sigma (plus binning slack for the pointwise CCE)
    double e1 = 0.0, e2 = 0.0, var1 = 0.0, var2 = 0.0;
    bool preconditions_ok = false;
    bool pass = false;

    std::string to_json() const;
};

// Monte-Carlo verification of a named theorem on a synthetic space. Checks
// the variance non-inflation precondition empirically and fails the report
// when the generated space violates it.
VerificationReport verify_bound_empirically(const SyntheticSpace& space,
                                            const std::string& composition,
                                            const std::string& bound, int bin_count = 10,
                                            int bootstrap_resamples = 200);

}  // namespace coco
