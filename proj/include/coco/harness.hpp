#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coco/core.hpp"
#include "coco/formula.hpp"
#include "coco/metrics.hpp"
#include "coco/simulator.hpp"

namespace coco {

struct ExperimentConfig {
    std::string formula = "A1 & A2";
    std::vector<std::string> compositions = {"product", "weighted", "power", "logreg", "bayes"};
    std::vector<double> lambdas = {0.5, 0.8};
    int repetitions = 20;
    int bin_count = 10;
    RngSeed seed{42, 0};
    double split_fraction = 0.5;
    double bayes_prior = 0.5;
    int bayes_bins = 10;
    double bayes_smoothing = 1.0;

    CollectConfig simulate;  // used by the simulate subcommand

    void validate() const;
    static ExperimentConfig from_toml_file(const std::string& path);
};

struct MetricAggregate {
    double mean = 0.0;
    double stddev = 0.0;
};

struct ResultRow {
    std::string source;  // "m1", "m2", or a composition name
    std::string target;  // "assumption" or "safety"
    MetricAggregate ece, mce, cce, brier, auc;
};

struct ResultTable {
    double lambda = 0.5;
    std::vector<ResultRow> rows;
    int repetitions_used = 0;
    int repetitions_skipped = 0;
    std::map<std::string, std::string> metadata;
};

// Per-row predictions on the evaluation half, for reliability diagrams.
struct RowDiagnostics {
    std::vector<double> confidences;
    std::vector<bool> labels;
};

struct ExperimentResult {
    std::vector<ResultTable> tables;  // one per lambda
    // Diagnostics from the last repetition, keyed by "source/target".
    std::map<std::string, RowDiagnostics> diagnostics;
};

// The cross-validation protocol: per repetition, split by trace, calibrate
// per monitor and fit the data-driven compositions on the calibration half,
// evaluate everything against both the assumption targets and safety on the
// test half, and aggregate mean/std over repetitions.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const Dataset& data);

enum class TableFormat { Csv, Json, Markdown };

std::string format_table(const ResultTable& t, TableFormat format);
void emit_table(const ResultTable& t, TableFormat format, const std::string& path);

std::string reliability_csv(const RowDiagnostics& d, const Binning& b);

}  // namespace coco
