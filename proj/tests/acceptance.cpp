// Acceptance suite: one printed PASS/FAIL line per criterion, nonzero exit on
// any failure. Oracles here are deliberately independent re-implementations
// (direct loops, exhaustive enumeration) rather than calls back into the
// library code they check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "coco/bounds.hpp"
#include "coco/calibration.hpp"
#include "coco/composition.hpp"
#include "coco/formula.hpp"
#include "coco/harness.hpp"
#include "coco/metrics.hpp"
#include "coco/simulator.hpp"

namespace fs = std::filesystem;
using namespace coco;

namespace {

int g_failures = 0;

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void report(int index, const std::string& name, bool pass, const std::string& detail) {
    std::printf("criterion %2d [%s]: %s  (%s)\n", index, name.c_str(), pass ? "PASS" : "FAIL",
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(4);
    out << v;
    return out.str();
}

// ---------------------------------------------------------------------------
// Criterion 1: brute-force metric oracles.

struct BruteMetrics {
    double ece = 0.0, mce = 0.0, cce = 0.0, brier = 0.0, auc = 0.0;
};

BruteMetrics brute_force_metrics(const std::vector<double>& ms, const std::vector<bool>& as,
                                 int bin_count) {
    BruteMetrics r;
    std::size_t n = ms.size();
    // Direct per-bin loops with [lo, hi) bins, last closed at 1.
    bool any_bin = false;
    for (int k = 0; k < bin_count; ++k) {
        double lo = static_cast<double>(k) / bin_count;
        double hi = static_cast<double>(k + 1) / bin_count;
        double conf = 0.0, occ = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            bool inside = k + 1 == bin_count ? (ms[i] >= lo && ms[i] <= 1.0)
                                             : (ms[i] >= lo && ms[i] < hi);
            if (!inside) continue;
            ++count;
            conf += ms[i];
            occ += as[i] ? 1.0 : 0.0;
        }
        if (count == 0) continue;
        conf /= static_cast<double>(count);
        occ /= static_cast<double>(count);
        double gap = conf - occ;
        r.ece += static_cast<double>(count) / static_cast<double>(n) * std::fabs(gap);
        r.mce = std::max(r.mce, std::fabs(gap));
        r.cce = any_bin ? std::max(r.cce, gap) : gap;
        any_bin = true;
    }
    for (std::size_t i = 0; i < n; ++i) {
        double d = ms[i] - (as[i] ? 1.0 : 0.0);
        r.brier += d * d;
    }
    r.brier /= static_cast<double>(n);
    // Pairwise concordance with half credit for ties.
    double score = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!as[i]) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (as[j]) continue;
            ++pairs;
            if (ms[i] > ms[j])
                score += 1.0;
            else if (ms[i] == ms[j])
                score += 0.5;
        }
    }
    r.auc = score / static_cast<double>(pairs);
    return r;
}

bool criterion_metrics_oracle() {
    auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        std::size_t n = 5 + rng() % 196;
        std::vector<double> ms;
        std::vector<bool> as;
        bool pos = false, neg = false;
        for (std::size_t i = 0; i < n; ++i) {
            double m = u(rng);
            if (rep % 3 == 0) m = std::round(m * 10.0) / 10.0;  // force ties and bin edges
            bool a = u(rng) < m;
            ms.push_back(m);
            as.push_back(a);
            (a ? pos : neg) = true;
        }
        if (!pos || !neg) {
            ms.push_back(0.5);
            as.push_back(!pos);
            ms.push_back(0.5);
            as.push_back(neg);
        }
        auto b = Binning::uniform(10);
        auto oracle = brute_force_metrics(ms, as, 10);
        worst = std::max({worst, std::fabs(ece_hat(ms, as, b) - oracle.ece),
                          std::fabs(mce_hat(ms, as, b) - oracle.mce),
                          std::fabs(cce_hat(ms, as, b) - oracle.cce),
                          std::fabs(brier(ms, as) - oracle.brier),
                          std::fabs(auc(ms, as) - oracle.auc)});
    }
    double elapsed = seconds_since(start);
    bool pass = worst <= 1e-12 && elapsed < 10.0;
    report(1, "metrics oracle equivalence", pass,
           "max deviation " + fmt(worst) + ", " + fmt(elapsed) + " s");
    return pass;
}

// ---------------------------------------------------------------------------
// Criterion 2: calibration recovery.

bool criterion_calibration_recovery() {
    auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t n = 50000;
    std::vector<double> ms;
    std::vector<bool> as;
    for (std::size_t i = 0; i < n; ++i) {
        double m = u(rng);
        double p = 1.0 / (1.0 + std::exp(-2.0 * log_odds(m)));
        ms.push_back(m);
        as.push_back(u(rng) < p);
    }
    auto fit = platt_fit(ms, as, 0.5);
    std::vector<double> calibrated;
    for (double m : ms) calibrated.push_back(platt_apply(fit, m));
    auto b = Binning::uniform(10);
    double before = ece_hat(ms, as, b);
    double after = ece_hat(calibrated, as, b);
    double elapsed = seconds_since(start);
    bool pass = std::fabs(fit.c - -2.0) <= 0.15 && std::fabs(fit.d) <= 0.15 &&
                before >= 2.0 * after && elapsed < 30.0;
    report(2, "calibration recovery", pass,
           "c " + fmt(fit.c) + ", d " + fmt(fit.d) + ", ece " + fmt(before) + " -> " +
               fmt(after) + ", " + fmt(elapsed) + " s");
    return pass;
}

// ---------------------------------------------------------------------------
// Criteria 3-5: Monte-Carlo bound verification on shared synthetic spaces.

std::vector<SyntheticSpace> make_spaces(int wanted) {
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> shape(1.0, 5.0);
    std::uniform_real_distribution<double> bias(-0.1, 0.1);
    std::vector<SyntheticSpace> spaces;
    int attempt = 0;
    while (static_cast<int>(spaces.size()) < wanted && attempt < wanted * 10) {
        SyntheticSpace sp;
        sp.alpha1 = shape(rng);
        sp.beta1 = shape(rng);
        sp.alpha2 = shape(rng);
        sp.beta2 = shape(rng);
        sp.bias1 = bias(rng);
        sp.bias2 = bias(rng);
        sp.sample_count = 100000;
        sp.seed = {1000 + static_cast<std::uint64_t>(attempt), 1};
        ++attempt;
        // Keep only spaces satisfying the theorems' preconditions.
        if (verify_bound_empirically(sp, "product", "ece_product", 10, 20).preconditions_ok)
            spaces.push_back(sp);
    }
    return spaces;
}

bool criterion_bound(int index, const std::vector<SyntheticSpace>& spaces,
                     const std::string& composition, const std::string& bound,
                     const std::string& name, double limit_seconds) {
    auto start = std::chrono::steady_clock::now();
    int passed = 0;
    double worst_margin = -1e9;
    for (const auto& sp : spaces) {
        auto rep = verify_bound_empirically(sp, composition, bound, 10, 200);
        if (rep.pass) ++passed;
        worst_margin = std::max(worst_margin, rep.measured - rep.bound_value - rep.slack);
    }
    double elapsed = seconds_since(start);
    bool pass = spaces.size() >= 20 && passed == static_cast<int>(spaces.size()) &&
                elapsed < limit_seconds;
    report(index, name, pass,
           std::to_string(passed) + "/" + std::to_string(spaces.size()) +
               " spaces, worst margin " + fmt(worst_margin) + ", " + fmt(elapsed) + " s");
    return pass;
}

bool criterion_cce_corollary_tightness() {
    // Two perfectly calibrated independent monitors: the product's maximum
    // overconfidence allowance versus the pointwise floor is attained near
    // x = 1/2, at the e1 = e2 = 0 corollary value of 1/4.
    SyntheticSpace sp;
    sp.sample_count = 100000;
    sp.seed = {909, 2};
    auto s = generate_space(sp);
    std::vector<double> mc;
    std::vector<bool> conj;
    for (std::size_t i = 0; i < s.m1.size(); ++i) {
        mc.push_back(s.m1[i] * s.m2[i]);
        conj.push_back(s.a1[i] && s.a2[i]);
    }
    auto b = Binning::uniform(10);
    auto summary = bin_summaries(mc, conj, b);
    double measured = 0.0;
    for (const auto& bin : summary.bins) {
        if (bin.empty()) continue;
        measured = std::max(measured, bin.occ - cce_product_pointwise(bin.conf, 0.0, 0.0));
    }
    return std::fabs(measured - 0.25) <= 0.05;
}

// ---------------------------------------------------------------------------
// Criteria 6-7: end-to-end mountain-car properties.

struct EndToEnd {
    bool collected = false;
    double auc_product = 0.0, auc_m1 = 0.0, auc_m2 = 0.0;
    double p_safe_given_violation = 1.0;
    double cce_logreg_05 = 0.0, cce_logreg_08 = 0.0;
};

EndToEnd run_end_to_end() {
    EndToEnd r;
    CollectConfig cc;
    cc.episodes = 500;
    cc.seed = {42, 0};
    auto region = build_assumption_region(cc.region_grid, default_controller);
    auto collected = collect_dataset(cc, region);

    std::size_t violated = 0, violated_safe = 0;
    for (const auto& s : collected.dataset.samples)
        if (!(s.assumption_flags[0] && s.assumption_flags[1])) {
            ++violated;
            if (s.safety_flag) ++violated_safe;
        }
    if (violated == 0) return r;
    r.p_safe_given_violation =
        static_cast<double>(violated_safe) / static_cast<double>(violated);

    ExperimentConfig ec;
    ec.formula = "A1 & A2";
    ec.lambdas = {0.5, 0.8};
    ec.repetitions = 5;
    ec.seed = {42, 0};
    auto result = run_experiment(ec, collected.dataset);
    auto row = [&](double lambda, const std::string& source) -> const ResultRow* {
        for (const auto& table : result.tables) {
            if (table.lambda != lambda) continue;
            for (const auto& rr : table.rows)
                if (rr.source == source && rr.target == "safety") return &rr;
        }
        return nullptr;
    };
    const auto* product = row(0.5, "product");
    const auto* m1 = row(0.5, "m1");
    const auto* m2 = row(0.5, "m2");
    const auto* lr05 = row(0.5, "logreg");
    const auto* lr08 = row(0.8, "logreg");
    if (!product || !m1 || !m2 || !lr05 || !lr08) return r;
    r.auc_product = product->auc.mean;
    r.auc_m1 = m1->auc.mean;
    r.auc_m2 = m2->auc.mean;
    r.cce_logreg_05 = lr05->cce.mean;
    r.cce_logreg_08 = lr08->cce.mean;
    r.collected = true;
    return r;
}

// ---------------------------------------------------------------------------
// Criterion 8: composition ordering.

bool criterion_ordering() {
    std::mt19937_64 rng(808);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t violations = 0;
    for (std::size_t i = 0; i < 1000000; ++i) {
        std::vector<double> ms{u(rng), u(rng)};
        auto w = inverse_variance_weights({0.0001 + u(rng), 0.0001 + u(rng)});
        double lo = power_product(ms);
        double mid = product(ms);
        double hi = weighted_average(ms, w);
        if (!(lo <= mid && mid <= hi)) ++violations;
    }
    bool pass = violations == 0;
    report(8, "composition ordering", pass,
           std::to_string(violations) + " violations in 1e6 pairs");
    return pass;
}

// ---------------------------------------------------------------------------
// Criterion 9: formula compiler versus exhaustive enumeration.

double enumeration_oracle(const FormulaPtr& f, const std::vector<double>& ps) {
    int n = static_cast<int>(ps.size());
    double total = 0.0;
    for (int mask = 0; mask < (1 << n); ++mask) {
        std::vector<bool> assignment;
        double weight = 1.0;
        for (int i = 0; i < n; ++i) {
            bool bit = mask & (1 << i);
            assignment.push_back(bit);
            weight *= bit ? ps[i] : 1.0 - ps[i];
        }
        if (f->eval(assignment)) total += weight;
    }
    return total;
}

bool criterion_formula_compiler() {
    // Exhaustive structural enumeration to depth 2 over three variables, plus
    // deeper nested templates to depth 4.
    std::vector<FormulaPtr> depth0{PropFormula::make_var(0), PropFormula::make_var(1),
                                   PropFormula::make_var(2)};
    auto combine = [](const std::vector<FormulaPtr>& pool) {
        std::vector<FormulaPtr> out;
        for (const auto& f : pool) out.push_back(PropFormula::make_not(f));
        for (const auto& a : pool)
            for (const auto& b : pool) {
                out.push_back(PropFormula::make_and(a, b));
                out.push_back(PropFormula::make_or(a, b));
                out.push_back(PropFormula::make_implies(a, b));
            }
        return out;
    };
    auto depth1 = combine(depth0);
    std::vector<FormulaPtr> pool01 = depth0;
    pool01.insert(pool01.end(), depth1.begin(), depth1.end());
    auto depth2 = combine(pool01);

    std::vector<FormulaPtr> formulas = pool01;
    formulas.insert(formulas.end(), depth2.begin(), depth2.end());
    for (const char* text :
         {"((A1 & A2) | (!A1 & A3)) -> (A2 | A3)", "!(!(A1 | !A2) & !(A2 -> A3))",
          "(A1 -> (A2 -> A3)) -> ((A1 & A2) -> A3)", "!(A1 & (A2 | !(A3 -> A1)))",
          "((A1 | A2) & (A2 | A3)) & (A3 | A1)", "(!(A1 -> A2) | !(A2 -> A3)) -> !A3",
          "((A1 & !A2) | (A2 & !A3)) | (A3 & !A1)", "!((A1 -> A2) & ((A2 -> A3) -> A1))"})
        formulas.push_back(parse_formula(text));

    std::mt19937_64 rng(909);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ConjComposer independent = [](const std::vector<double>& ms) { return product(ms); };
    double worst = 0.0;
    for (const auto& f : formulas) {
        auto compiled = compile_formula(f);
        for (int rep = 0; rep < 5; ++rep) {
            std::vector<double> ps{u(rng), u(rng), u(rng)};
            double expected = enumeration_oracle(f, ps);
            double got = evaluate(compiled, ps, independent).value();
            worst = std::max(worst, std::fabs(got - expected));
        }
    }
    bool pass = worst <= 1e-9;
    report(9, "formula compiler", pass,
           std::to_string(formulas.size()) + " formulas, max deviation " + fmt(worst));
    return pass;
}

// ---------------------------------------------------------------------------
// Criterion 10: CLI determinism.

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

bool criterion_determinism() {
    fs::path base = fs::temp_directory_path() / "coco_acceptance_determinism";
    std::error_code ec;
    fs::remove_all(base, ec);
    fs::create_directories(base);
    fs::path cfg = base / "exp.toml";
    {
        std::ofstream out(cfg);
        out << "formula = \"A1 & A2\"\nlambdas = [0.5]\nrepetitions = 2\nseed = 7\n\n"
               "[simulate]\nepisodes = 60\n";
    }
    auto run = [&](const std::string& tag) -> bool {
        fs::path sim = base / ("sim_" + tag);
        fs::path res = base / ("res_" + tag);
        std::string c1 = std::string(COCO_BIN) + " simulate --config " + cfg.string() +
                         " --out " + sim.string() + " > /dev/null";
        std::string c2 = std::string(COCO_BIN) + " run --config " + cfg.string() + " --data " +
                         (sim / "data.csv").string() + " --out " + res.string() + " > /dev/null";
        return std::system(c1.c_str()) == 0 && std::system(c2.c_str()) == 0;
    };
    if (!run("a") || !run("b")) {
        report(10, "cli determinism", false, "cli invocation failed");
        return false;
    }
    std::size_t compared = 0;
    bool identical = true;
    for (const auto& pair : {std::pair<std::string, std::string>{"sim_a", "sim_b"},
                             {"res_a", "res_b"}}) {
        for (const auto& entry : fs::directory_iterator(base / pair.first)) {
            if (entry.path().extension() != ".csv") continue;
            ++compared;
            if (slurp(entry.path()) !=
                slurp(base / pair.second / entry.path().filename()))
                identical = false;
        }
    }
    bool pass = identical && compared >= 2;
    report(10, "cli determinism", pass,
           std::to_string(compared) + " csv files compared byte-for-byte");
    fs::remove_all(base, ec);
    return pass;
}

}  // namespace

int main() {
    criterion_metrics_oracle();
    criterion_calibration_recovery();

    auto spaces = make_spaces(20);
    criterion_bound(3, spaces, "product", "ece_product", "product ece bound", 300.0);
    {
        auto start = std::chrono::steady_clock::now();
        int passed = 0;
        for (const auto& sp : spaces)
            if (verify_bound_empirically(sp, "product", "cce_product", 10, 200).pass) ++passed;
        bool tight = criterion_cce_corollary_tightness();
        bool pass = spaces.size() >= 20 && passed == static_cast<int>(spaces.size()) && tight;
        report(4, "product cce bound", pass,
               std::to_string(passed) + "/" + std::to_string(spaces.size()) +
                   " spaces, corollary value " + std::string(tight ? "matched" : "missed") +
                   ", " + fmt(seconds_since(start)) + " s");
    }
    criterion_bound(5, spaces, "weighted", "ece_weighted", "weighted ece bound", 300.0);

    {
        auto start = std::chrono::steady_clock::now();
        auto e2e = run_end_to_end();
        double elapsed = seconds_since(start);
        double best_single = std::max(e2e.auc_m1, e2e.auc_m2);
        bool pass6 = e2e.collected && e2e.auc_product >= best_single - 0.02 &&
                     e2e.auc_product >= 0.70 && e2e.p_safe_given_violation < 0.5 &&
                     elapsed < 900.0;
        report(6, "end-to-end safety prediction", pass6,
               "product auc " + fmt(e2e.auc_product) + " (reference 0.784 +/- 0.007), m1 " +
                   fmt(e2e.auc_m1) + " (reference 0.699 +/- 0.01), m2 " + fmt(e2e.auc_m2) +
                   " (reference 0.674 +/- 0.007), P(safe|violation) " +
                   fmt(e2e.p_safe_given_violation) + ", " + fmt(elapsed) + " s");
        bool pass7 = e2e.collected && e2e.cce_logreg_08 <= e2e.cce_logreg_05;
        report(7, "conservatism tuning", pass7,
               "logreg cce vs safety " + fmt(e2e.cce_logreg_05) + " (lambda 0.5) -> " +
                   fmt(e2e.cce_logreg_08) + " (lambda 0.8)");
    }

    criterion_ordering();
    criterion_formula_compiler();
    criterion_determinism();

    std::printf("%s: %d criterion(s) failed\n", g_failures == 0 ? "ALL PASS" : "FAILURES",
                g_failures);
    return g_failures == 0 ? 0 : 1;
}
