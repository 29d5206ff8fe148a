#include "coco/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "coco/calibration.hpp"
#include "coco/composition.hpp"
#include "toml_lite.hpp"

namespace coco {

namespace {

const std::set<std::string> kSupportedCompositions = {"product", "weighted", "power", "logreg",
                                                      "bayes"};

}  // namespace

void ExperimentConfig::validate() const {
    if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
    if (bin_count < 1) throw ConfigError("bin count must be >= 1");
    if (!(split_fraction > 0.0 && split_fraction < 1.0))
        throw ConfigError("split fraction must lie in (0,1)");
    parse_formula(formula);  // throws on syntax errors
    for (const auto& c : compositions)
        if (!kSupportedCompositions.count(c))
            throw ConfigError("unsupported composition '" + c + "'");
    for (double l : lambdas)
        if (!(l >= 0.0 && l <= 1.0)) throw ConfigError("lambda must lie in [0,1]");
}

ExperimentConfig ExperimentConfig::from_toml_file(const std::string& path) {
    auto t = detail::TomlLite::parse_file(path);
    ExperimentConfig cfg;
    cfg.formula = t.get_string("formula", cfg.formula);
    cfg.compositions = t.get_string_array("compositions", cfg.compositions);
    cfg.lambdas = t.get_number_array("lambdas", cfg.lambdas);
    cfg.repetitions = static_cast<int>(t.get_number("repetitions", cfg.repetitions));
    cfg.bin_count = static_cast<int>(t.get_number("bins", cfg.bin_count));
    cfg.seed.seed = static_cast<std::uint64_t>(t.get_number("seed", 42));
    cfg.split_fraction = t.get_number("split_fraction", cfg.split_fraction);
    cfg.bayes_prior = t.get_number("bayes.prior", cfg.bayes_prior);
    cfg.bayes_bins = static_cast<int>(t.get_number("bayes.bins", cfg.bayes_bins));
    cfg.bayes_smoothing = t.get_number("bayes.smoothing", cfg.bayes_smoothing);

    cfg.simulate.episodes =
        static_cast<std::size_t>(t.get_number("simulate.episodes", 500));
    cfg.simulate.seed = cfg.seed;
    auto& grid = cfg.simulate.region_grid;
    grid.res_p0 = static_cast<int>(t.get_number("simulate.region_res_p0", grid.res_p0));
    grid.res_c = static_cast<int>(t.get_number("simulate.region_res_c", grid.res_c));
    grid.res_d = static_cast<int>(t.get_number("simulate.region_res_d", grid.res_d));
    cfg.simulate.invalidation_window =
        static_cast<int>(t.get_number("simulate.invalidation_window", 6));
    cfg.simulate.invalidation_epsilon =
        t.get_number("simulate.invalidation_epsilon", cfg.simulate.invalidation_epsilon);
    cfg.simulate.invalidation_resolution = static_cast<int>(
        t.get_number("simulate.invalidation_resolution", cfg.simulate.invalidation_resolution));
    cfg.simulate.invalidation_budget = static_cast<int>(
        t.get_number("simulate.invalidation_budget", cfg.simulate.invalidation_budget));
    cfg.simulate.mc_monitor_samples = static_cast<std::size_t>(
        t.get_number("simulate.mc_monitor_samples", cfg.simulate.mc_monitor_samples));
    cfg.simulate.process_sigma_p =
        t.get_number("simulate.process_sigma_p", cfg.simulate.process_sigma_p);
    cfg.simulate.process_sigma_v =
        t.get_number("simulate.process_sigma_v", cfg.simulate.process_sigma_v);
    if (t.has("simulate.controller"))
        cfg.simulate.controller_path = t.get_string("simulate.controller", "");

    cfg.validate();
    return cfg;
}

namespace {

bool both_classes(const std::vector<bool>& labels) {
    bool pos = false, neg = false;
    for (bool l : labels) (l ? pos : neg) = true;
    return pos && neg;
}

std::vector<bool> formula_targets(const FormulaPtr& f, const Dataset& d) {
    std::vector<bool> out;
    out.reserve(d.size());
    for (const auto& s : d.samples) out.push_back(f->eval(s.assumption_flags));
    return out;
}

struct Fitted {
    std::vector<CalibrationParams> platt;       // per monitor
    WeightVector weights;                       // inverse post-calibration variance
    std::optional<LogRegParams> logreg;
    std::optional<JointHistogram> bayes;
};

std::vector<std::vector<double>> calibrated_rows(const Dataset& d,
                                                 const std::vector<CalibrationParams>& platt) {
    std::vector<std::vector<double>> rows;
    rows.reserve(d.size());
    for (const auto& s : d.samples) {
        std::vector<double> ms(s.monitor_values.size());
        for (std::size_t i = 0; i < ms.size(); ++i)
            ms[i] = platt_apply(platt[i], s.monitor_values[i]);
        rows.push_back(std::move(ms));
    }
    return rows;
}

// Composed confidence per test sample for one composition method.
std::vector<double> compose_column(const std::string& name, const Dataset& test,
                                   const std::vector<std::vector<double>>& test_rows,
                                   const CompositionExpr& expr, const Fitted& fit,
                                   double bayes_prior) {
    std::vector<double> out;
    out.reserve(test_rows.size());
    if (name == "logreg") {
        for (const auto& ms : test_rows) out.push_back(logreg_apply(*fit.logreg, ms));
        return out;
    }
    if (name == "bayes") {
        // Sequential update along each trace, prior reset at trace start.
        double prior = bayes_prior;
        std::int64_t current_trace = -1;
        for (std::size_t i = 0; i < test_rows.size(); ++i) {
            if (test.samples[i].trace_id != current_trace) {
                current_trace = test.samples[i].trace_id;
                prior = bayes_prior;
            }
            prior = bayes_step(*fit.bayes, prior, test_rows[i]);
            out.push_back(prior);
        }
        return out;
    }

    IndexedConjComposer conj;
    if (name == "product") {
        conj = [](const std::vector<int>&, const std::vector<double>& vals) {
            return product(vals);
        };
    } else if (name == "power") {
        conj = [](const std::vector<int>&, const std::vector<double>& vals) {
            return power_product(vals);
        };
    } else if (name == "weighted") {
        conj = [&fit](const std::vector<int>& idx, const std::vector<double>& vals) {
            // Restrict the global inverse-variance weights to the
            // conjunction's monitors and renormalize.
            WeightVector w;
            double total = 0.0;
            for (int i : idx) total += fit.weights.weights[i];
            for (int i : idx) w.weights.push_back(fit.weights.weights[i] / total);
            return weighted_average(vals, w);
        };
    } else {
        throw ConfigError("unsupported composition '" + name + "'");
    }
    for (const auto& ms : test_rows) out.push_back(evaluate(expr, ms, conj).value());
    return out;
}

struct MetricSamples {
    std::vector<double> ece, mce, cce, brier, auc;
};

void record_metrics(MetricSamples& acc, const std::vector<double>& ms,
                    const std::vector<bool>& labels, const Binning& b) {
    acc.ece.push_back(ece_hat(ms, labels, b));
    acc.mce.push_back(mce_hat(ms, labels, b));
    acc.cce.push_back(cce_hat(ms, labels, b));
    acc.brier.push_back(brier(ms, labels));
    acc.auc.push_back(auc(ms, labels));
}

MetricAggregate aggregate(const std::vector<double>& values) {
    auto [mean, var] = mean_variance(values);
    return {mean, std::sqrt(var)};
}

std::string row_key(const std::string& source, const std::string& target) {
    return source + "/" + target;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const Dataset& data) {
    cfg.validate();
    if (data.trace_ids().size() < 2) throw SplitError("dataset must contain >= 2 traces");
    if (!both_classes(data.safety_column()))
        throw StatsError("dataset needs both safety outcomes");

    const int n = data.monitor_count;
    auto formula = parse_formula(cfg.formula);
    if (formula->max_var() + 1 > n)
        throw ConfigError("formula references more monitors than the dataset provides");
    auto expr = compile_formula(formula);
    Binning binning = Binning::uniform(cfg.bin_count);

    ExperimentResult result;
    for (double lambda : cfg.lambdas) {
        // Bayes ignores lambda; keep its rows in the neutral table only.
        std::vector<std::string> comps;
        for (const auto& c : cfg.compositions)
            if (c != "bayes" || lambda == 0.5) comps.push_back(c);

        std::map<std::string, MetricSamples> samples;
        int used = 0, skipped = 0;
        for (int rep = 0; rep < cfg.repetitions; ++rep) {
            RngSeed rep_seed{cfg.seed.seed, cfg.seed.stream_id * 100000 + 1000 + rep};
            auto [calib, test] = split_by_trace(data, cfg.split_fraction, rep_seed);

            auto calib_targets = formula_targets(formula, calib);
            auto test_targets = formula_targets(formula, test);
            bool degenerate = calib.empty() || test.empty() ||
                              !both_classes(calib_targets) || !both_classes(test_targets) ||
                              !both_classes(test.safety_column());
            for (int i = 0; i < n && !degenerate; ++i)
                degenerate = !both_classes(calib.assumption_column(i)) ||
                             !both_classes(test.assumption_column(i));
            if (degenerate) {
                ++skipped;
                continue;
            }

            Fitted fit;
            bool need_weighted = std::count(comps.begin(), comps.end(), "weighted") > 0;
            try {
                std::vector<double> variances;
                for (int i = 0; i < n; ++i) {
                    fit.platt.push_back(
                        platt_fit(calib.monitor_column(i), calib.assumption_column(i), lambda));
                    std::vector<double> cal;
                    for (double m : calib.monitor_column(i))
                        cal.push_back(platt_apply(fit.platt.back(), m));
                    variances.push_back(mean_variance(cal).second);
                }
                if (need_weighted) fit.weights = inverse_variance_weights(variances);

                auto calib_rows = calibrated_rows(calib, fit.platt);
                if (std::count(comps.begin(), comps.end(), "logreg"))
                    fit.logreg = logreg_fit(calib_rows, calib_targets, lambda);
                if (std::count(comps.begin(), comps.end(), "bayes"))
                    fit.bayes = bayes_fit(calib_rows, calib_targets, cfg.bayes_bins,
                                          cfg.bayes_smoothing);
            } catch (const FitError&) {
                ++skipped;
                continue;
            }

            auto test_rows = calibrated_rows(test, fit.platt);
            auto phi = test.safety_column();

            result.diagnostics.clear();
            for (int i = 0; i < n; ++i) {
                std::vector<double> col;
                for (const auto& ms : test_rows) col.push_back(ms[i]);
                auto a_col = test.assumption_column(i);
                std::string name = "m" + std::to_string(i + 1);
                record_metrics(samples[row_key(name, "assumption")], col, a_col, binning);
                record_metrics(samples[row_key(name, "safety")], col, phi, binning);
                result.diagnostics[row_key(name, "assumption")] = {col, a_col};
                result.diagnostics[row_key(name, "safety")] = {col, phi};
            }
            for (const auto& comp : comps) {
                auto col = compose_column(comp, test, test_rows, expr, fit, cfg.bayes_prior);
                record_metrics(samples[row_key(comp, "assumption")], col, test_targets,
                               binning);
                record_metrics(samples[row_key(comp, "safety")], col, phi, binning);
                result.diagnostics[row_key(comp, "assumption")] = {col, test_targets};
                result.diagnostics[row_key(comp, "safety")] = {col, phi};
            }
            ++used;
        }

        if (used == 0)
            throw StatsError("every repetition was degenerate; cannot aggregate");

        ResultTable table;
        table.lambda = lambda;
        table.repetitions_used = used;
        table.repetitions_skipped = skipped;
        table.metadata["formula"] = cfg.formula;
        table.metadata["seed"] = std::to_string(cfg.seed.seed);
        table.metadata["skipped_repetitions"] = std::to_string(skipped);

        auto add_row = [&](const std::string& source, const std::string& target) {
            const auto& s = samples.at(row_key(source, target));
            ResultRow row;
            row.source = source;
            row.target = target;
            row.ece = aggregate(s.ece);
            row.mce = aggregate(s.mce);
            row.cce = aggregate(s.cce);
            row.brier = aggregate(s.brier);
            row.auc = aggregate(s.auc);
            table.rows.push_back(std::move(row));
        };
        for (int i = 0; i < n; ++i) {
            add_row("m" + std::to_string(i + 1), "assumption");
            add_row("m" + std::to_string(i + 1), "safety");
        }
        for (const auto& comp : comps) {
            add_row(comp, "assumption");
            add_row(comp, "safety");
        }
        result.tables.push_back(std::move(table));
    }
    return result;
}

namespace {

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(6);
    out << v;
    return out.str();
}

}  // namespace

std::string format_table(const ResultTable& t, TableFormat format) {
    std::ostringstream out;
    switch (format) {
        case TableFormat::Csv: {
            out << "source,target,ece_mean,ece_std,mce_mean,mce_std,cce_mean,cce_std,"
                   "brier_mean,brier_std,auc_mean,auc_std\n";
            for (const auto& r : t.rows)
                out << r.source << ',' << r.target << ',' << fmt(r.ece.mean) << ','
                    << fmt(r.ece.stddev) << ',' << fmt(r.mce.mean) << ',' << fmt(r.mce.stddev)
                    << ',' << fmt(r.cce.mean) << ',' << fmt(r.cce.stddev) << ','
                    << fmt(r.brier.mean) << ',' << fmt(r.brier.stddev) << ','
                    << fmt(r.auc.mean) << ',' << fmt(r.auc.stddev) << '\n';
            break;
        }
        case TableFormat::Json: {
            nlohmann::json j;
            j["lambda"] = t.lambda;
            j["repetitions_used"] = t.repetitions_used;
            j["repetitions_skipped"] = t.repetitions_skipped;
            j["metadata"] = t.metadata;
            j["columns"] = {"ece", "mce", "cce", "brier", "auc"};
            auto rows = nlohmann::json::array();
            for (const auto& r : t.rows) {
                rows.push_back({{"source", r.source},
                                {"target", r.target},
                                {"ece", {{"mean", r.ece.mean}, {"std", r.ece.stddev}}},
                                {"mce", {{"mean", r.mce.mean}, {"std", r.mce.stddev}}},
                                {"cce", {{"mean", r.cce.mean}, {"std", r.cce.stddev}}},
                                {"brier", {{"mean", r.brier.mean}, {"std", r.brier.stddev}}},
                                {"auc", {{"mean", r.auc.mean}, {"std", r.auc.stddev}}}});
            }
            j["rows"] = std::move(rows);
            out << j.dump(2) << '\n';
            break;
        }
        case TableFormat::Markdown: {
            out << "| Monitor | Predicts | ECE | MCE | CCE | Brier | AuC |\n";
            out << "|---|---|---|---|---|---|---|\n";
            for (const auto& r : t.rows) {
                auto cell = [](const MetricAggregate& m) {
                    return fmt(m.mean) + " ± " + fmt(m.stddev);
                };
                out << "| " << r.source << " | " << r.target << " | " << cell(r.ece) << " | "
                    << cell(r.mce) << " | " << cell(r.cce) << " | " << cell(r.brier) << " | "
                    << cell(r.auc) << " |\n";
            }
            break;
        }
    }
    return out.str();
}

void emit_table(const ResultTable& t, TableFormat format, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << format_table(t, format);
}

std::string reliability_csv(const RowDiagnostics& d, const Binning& b) {
    return bin_summaries_csv(bin_summaries(d.confidences, d.labels, b), b);
}

}  // namespace coco
