#include "coco/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "coco/composition.hpp"
#include "coco/metrics.hpp"

namespace coco {

namespace {

void check_unit(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0))
        throw RangeError(std::string(name) + " must lie in [0,1], got " + std::to_string(v));
}

}  // namespace

double safety_bound(double e1, double e2) {
    check_unit(e1, "e1");
    check_unit(e2, "e2");
    return std::min(1.0, e1 + e2);
}

std::pair<double, double> lemma_interval(double exp_mi_given_mc, double e) {
    check_unit(exp_mi_given_mc, "E[M_i | M_C]");
    check_unit(e, "e");
    return {std::max(0.0, exp_mi_given_mc - e), std::min(1.0, exp_mi_given_mc + e)};
}

BoundResult ece_product_bound(const MonitorErrorSpec& s1, const MonitorErrorSpec& s2) {
    check_unit(s1.e, "e1");
    check_unit(s2.e, "e2");
    double v = std::max(4.0 * s1.e * s2.e,
                        std::sqrt(s1.variance * s2.variance) + s1.e + s2.e + s1.e * s2.e);
    return {v, v > 1.0};
}

BoundResult ece_weighted_bound(double e1, double e2, double w1, double w2) {
    check_unit(e1, "e1");
    check_unit(e2, "e2");
    if (w1 < 0.0 || w2 < 0.0 || std::abs(w1 + w2 - 1.0) > 1e-9)
        throw RangeError("weights must be non-negative and sum to 1");
    double v = std::max(e1 + e2 + e1 * e2, std::max(w1, w2) + e1 + e2 - e1 * e2);
    return {v, v > 1.0};
}

double cce_product_pointwise(double x, double e1, double e2) {
    check_unit(x, "x");
    check_unit(e1, "e1");
    check_unit(e2, "e2");
    return std::max(0.0, x - e1) * std::max(0.0, x - e2);
}

BoundResult cce_product_bound(double e1, double e2) {
    check_unit(e1, "e1");
    check_unit(e2, "e2");
    double x0 = (1.0 + e1 + e2) / 2.0;
    double v;
    if (x0 >= 0.0 && x0 <= 1.0)
        v = (e1 * e1 - 2.0 * e1 * (-1.0 + e2) + (1.0 + e2) * (1.0 + e2)) / 4.0;
    else
        v = e1 + e2 - e1 * e2;
    return {v, v > 1.0};
}

double ece_end_to_end(double e1, double e2, double e3) {
    check_unit(e1, "e1");
    check_unit(e2, "e2");
    check_unit(e3, "e3");
    return std::min(1.0, e1 + e2 + e3);
}

double cce_end_to_end(double e) {
    check_unit(e, "e");
    return e;
}

// ---------------------------------------------------------------------------
// Synthetic spaces and Monte-Carlo verification

SyntheticSample generate_space(const SyntheticSpace& space) {
    if (space.sample_count == 0) throw Error("sample count must be positive");
    std::mt19937_64 rng(mix_seed(space.seed));
    std::gamma_distribution<double> g_a1(space.alpha1, 1.0), g_b1(space.beta1, 1.0);
    std::gamma_distribution<double> g_a2(space.alpha2, 1.0), g_b2(space.beta2, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    SyntheticSample s;
    s.m1.reserve(space.sample_count);
    s.m2.reserve(space.sample_count);
    s.a1.reserve(space.sample_count);
    s.a2.reserve(space.sample_count);
    for (std::size_t i = 0; i < space.sample_count; ++i) {
        double x1 = g_a1(rng), y1 = g_b1(rng);
        double x2 = g_a2(rng), y2 = g_b2(rng);
        double m1 = x1 / (x1 + y1);
        double m2 = x2 / (x2 + y2);
        s.m1.push_back(m1);
        s.m2.push_back(m2);
        s.a1.push_back(unif(rng) < std::clamp(m1 + space.bias1, 0.0, 1.0));
        s.a2.push_back(unif(rng) < std::clamp(m2 + space.bias2, 0.0, 1.0));
    }
    return s;
}

std::string VerificationReport::to_json() const {
    nlohmann::json j{{"composition", composition},
                     {"bound", bound},
                     {"measured", measured},
                     {"bound_value", bound_value},
                     {"sigma", sigma},
                     {"slack", slack},
                     {"e1", e1},
                     {"e2", e2},
                     {"var1", var1},
                     {"var2", var2},
                     {"preconditions_ok", preconditions_ok},
                     {"pass", pass}};
    return j.dump(2);
}

namespace {

// Var(M_i | M_C in bin) <= Var(M_i) within sampling tolerance, over bins of
// the composed value with enough mass to estimate a variance.
bool variance_non_inflation(const std::vector<double>& mi, const std::vector<double>& mc,
                            const Binning& b) {
    auto [mean_all, var_all] = mean_variance(mi);
    std::vector<std::vector<double>> per_bin(b.bin_count());
    for (std::size_t i = 0; i < mi.size(); ++i) per_bin[b.bin_of(mc[i])].push_back(mi[i]);
    for (const auto& vals : per_bin) {
        if (vals.size() < 100) continue;
        auto [mean_bin, var_bin] = mean_variance(vals);
        (void)mean_bin;
        if (var_bin > var_all * 1.05 + 1e-4) return false;
    }
    return true;
}

double conjunction_ece(const std::vector<double>& mc, const std::vector<bool>& a1,
                       const std::vector<bool>& a2, const Binning& b) {
    std::vector<bool> conj(a1.size());
    for (std::size_t i = 0; i < a1.size(); ++i) conj[i] = a1[i] && a2[i];
    return ece_hat(mc, conj, b);
}

// Worst-case deficit of the empirical conditional probability against the
// pointwise conservatism floor, over populated bins of the composed value.
double pointwise_cce_deficit(const std::vector<double>& mc, const std::vector<bool>& a1,
                             const std::vector<bool>& a2, const Binning& b, double e1,
                             double e2) {
    std::vector<std::size_t> count(b.bin_count(), 0), hits(b.bin_count(), 0);
    std::vector<double> conf(b.bin_count(), 0.0);
    for (std::size_t i = 0; i < mc.size(); ++i) {
        int k = b.bin_of(mc[i]);
        ++count[k];
        conf[k] += mc[i];
        if (a1[i] && a2[i]) ++hits[k];
    }
    double worst = -1.0;
    for (int k = 0; k < b.bin_count(); ++k) {
        if (count[k] < 50) continue;
        double x = conf[k] / static_cast<double>(count[k]);
        double occ = static_cast<double>(hits[k]) / static_cast<double>(count[k]);
        worst = std::max(worst, cce_product_pointwise(x, e1, e2) - occ);
    }
    return worst;
}

}  // namespace

VerificationReport verify_bound_empirically(const SyntheticSpace& space,
                                            const std::string& composition,
                                            const std::string& bound, int bin_count,
                                            int bootstrap_resamples) {
    auto sample = generate_space(space);
    const std::size_t n = sample.m1.size();
    Binning b = Binning::uniform(bin_count);

    VerificationReport r;
    r.composition = composition;
    r.bound = bound;
    r.e1 = mce_hat(sample.m1, sample.a1, b);
    r.e2 = mce_hat(sample.m2, sample.a2, b);
    r.var1 = mean_variance(sample.m1).second;
    r.var2 = mean_variance(sample.m2).second;

    std::vector<double> mc(n);
    WeightVector w;
    if (composition == "product") {
        for (std::size_t i = 0; i < n; ++i) mc[i] = sample.m1[i] * sample.m2[i];
    } else if (composition == "weighted") {
        w = inverse_variance_weights({r.var1, r.var2});
        for (std::size_t i = 0; i < n; ++i)
            mc[i] = w.weights[0] * sample.m1[i] + w.weights[1] * sample.m2[i];
    } else {
        throw ConfigError("unknown composition '" + composition + "'");
    }

    r.preconditions_ok = variance_non_inflation(sample.m1, mc, b) &&
                         variance_non_inflation(sample.m2, mc, b);

    auto statistic = [&](const std::vector<double>& cmc, const std::vector<bool>& ca1,
                         const std::vector<bool>& ca2) {
        if (bound == "cce_product")
            return pointwise_cce_deficit(cmc, ca1, ca2, b, r.e1, r.e2);
        return conjunction_ece(cmc, ca1, ca2, b);
    };

    if (bound == "ece_product") {
        r.bound_value = ece_product_bound({r.e1, r.var1}, {r.e2, r.var2}).value;
    } else if (bound == "ece_weighted") {
        if (composition != "weighted")
            throw ConfigError("ece_weighted applies to the weighted composition");
        r.bound_value = ece_weighted_bound(r.e1, r.e2, w.weights[0], w.weights[1]).value;
    } else if (bound == "cce_product") {
        if (composition != "product")
            throw ConfigError("cce_product applies to the product composition");
        r.bound_value = 0.0;  // deficit against the pointwise floor should vanish
    } else {
        throw ConfigError("unknown bound '" + bound + "'");
    }

    r.measured = statistic(mc, sample.a1, sample.a2);

    // Bootstrap std of the measured statistic.
    std::mt19937_64 rng(mix_seed({space.seed.seed, space.seed.stream_id + 7919}));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<double> boot(bootstrap_resamples);
    std::vector<double> bmc(n);
    std::vector<bool> ba1(n), ba2(n);
    for (int t = 0; t < bootstrap_resamples; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t j = pick(rng);
            bmc[i] = mc[j];
            ba1[i] = sample.a1[j];
            ba2[i] = sample.a2[j];
        }
        boot[t] = statistic(bmc, ba1, ba2);
    }
    r.sigma = std::sqrt(mean_variance(boot).second);
    r.slack = 3.0 * r.sigma;
    if (bound == "cce_product") {
        // Pointwise floor is evaluated at the bin's mean confidence; allow
        // one bin width of drift across the bin.
        r.slack += b.edges[1] - b.edges[0];
    }
    r.pass = r.preconditions_ok && r.measured <= r.bound_value + r.slack;
    return r;
}

}  // namespace coco
