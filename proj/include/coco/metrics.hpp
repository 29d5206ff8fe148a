#pragma once

#include <string>
#include <vector>

#include "coco/core.hpp"

namespace coco {

struct MetricsError : Error {
    using Error::Error;
};

// Uniform-by-default binning of [0,1]; bins are [e_k, e_{k+1}) with the last
// bin closed at 1.
struct Binning {
    std::vector<double> edges;  // K+1 ascending values, 0 and 1 at the ends

    static Binning uniform(int bin_count);
    int bin_count() const { return static_cast<int>(edges.size()) - 1; }
    int bin_of(double value) const;
};

struct BinSummary {
    struct Bin {
        std::size_t count = 0;
        double conf = 0.0;  // mean confidence in the bin
        double occ = 0.0;   // occurrence rate of the label in the bin
        bool empty() const { return count == 0; }
    };
    std::vector<Bin> bins;
    std::size_t total = 0;
};

BinSummary bin_summaries(const std::vector<double>& ms, const std::vector<bool>& labels,
                         const Binning& b);

// Binned estimators from the evaluation protocol. Empty bins contribute zero
// weight to ECE and are excluded from the MCE/CCE maxima.
double ece_hat(const std::vector<double>& ms, const std::vector<bool>& labels, const Binning& b);
double mce_hat(const std::vector<double>& ms, const std::vector<bool>& labels, const Binning& b);
// Signed maximum overconfidence; negative for underconfident estimators.
double cce_hat(const std::vector<double>& ms, const std::vector<bool>& labels, const Binning& b);

double brier(const std::vector<double>& ms, const std::vector<bool>& labels);

// Area under the ROC curve, trapezoidal over thresholds at distinct
// confidence values; ties count one half per pair.
double auc(const std::vector<double>& ms, const std::vector<bool>& labels);

// CSV export for reliability diagrams: bin_lo,bin_hi,count,conf,occ.
std::string bin_summaries_csv(const BinSummary& s, const Binning& b);

}  // namespace coco
