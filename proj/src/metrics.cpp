#include "coco/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace coco {

Binning Binning::uniform(int bin_count) {
    if (bin_count < 1) throw MetricsError("bin count must be >= 1");
    Binning b;
    b.edges.resize(bin_count + 1);
    for (int k = 0; k <= bin_count; ++k)
        b.edges[k] = static_cast<double>(k) / static_cast<double>(bin_count);
    return b;
}

int Binning::bin_of(double value) const {
    if (!(value >= edges.front() && value <= edges.back()))
        throw MetricsError("value " + std::to_string(value) + " outside binning range");
    // First edge strictly greater than value; last bin closed at the top.
    auto it = std::upper_bound(edges.begin(), edges.end(), value);
    int idx = static_cast<int>(it - edges.begin()) - 1;
    return std::min(idx, bin_count() - 1);
}

BinSummary bin_summaries(const std::vector<double>& ms, const std::vector<bool>& labels,
                         const Binning& b) {
    if (ms.size() != labels.size())
        throw MetricsError("confidence/label length mismatch: " + std::to_string(ms.size()) +
                           " vs " + std::to_string(labels.size()));
    if (ms.empty()) throw MetricsError("cannot bin an empty dataset");

    BinSummary s;
    s.bins.resize(b.bin_count());
    s.total = ms.size();
    std::vector<double> conf_sum(b.bin_count(), 0.0);
    std::vector<double> occ_sum(b.bin_count(), 0.0);
    for (std::size_t i = 0; i < ms.size(); ++i) {
        int k = b.bin_of(ms[i]);
        ++s.bins[k].count;
        conf_sum[k] += ms[i];
        occ_sum[k] += labels[i] ? 1.0 : 0.0;
    }
    for (int k = 0; k < b.bin_count(); ++k) {
        if (s.bins[k].count == 0) continue;
        s.bins[k].conf = conf_sum[k] / static_cast<double>(s.bins[k].count);
        s.bins[k].occ = occ_sum[k] / static_cast<double>(s.bins[k].count);
    }
    return s;
}

double ece_hat(const std::vector<double>& ms, const std::vector<bool>& labels, const Binning& b) {
    auto s = bin_summaries(ms, labels, b);
    double total = 0.0;
    for (const auto& bin : s.bins) {
        if (bin.empty()) continue;
        total += static_cast<double>(bin.count) / static_cast<double>(s.total) *
                 std::abs(bin.occ - bin.conf);
    }
    return total;
}

double mce_hat(const std::vector<double>& ms, const std::vector<bool>& labels, const Binning& b) {
    auto s = bin_summaries(ms, labels, b);
    double worst = 0.0;
    for (const auto& bin : s.bins)
        if (!bin.empty()) worst = std::max(worst, std::abs(bin.occ - bin.conf));
    return worst;
}

double cce_hat(const std::vector<double>& ms, const std::vector<bool>& labels, const Binning& b) {
    auto s = bin_summaries(ms, labels, b);
    bool any = false;
    double worst = 0.0;
    for (const auto& bin : s.bins) {
        if (bin.empty()) continue;
        double over = bin.conf - bin.occ;
        if (!any || over > worst) worst = over;
        any = true;
    }
    if (!any) throw MetricsError("no populated bins");
    return worst;
}

double brier(const std::vector<double>& ms, const std::vector<bool>& labels) {
    if (ms.size() != labels.size()) throw MetricsError("confidence/label length mismatch");
    if (ms.empty()) throw MetricsError("brier of an empty dataset");
    double total = 0.0;
    for (std::size_t i = 0; i < ms.size(); ++i) {
        double d = ms[i] - (labels[i] ? 1.0 : 0.0);
        total += d * d;
    }
    return total / static_cast<double>(ms.size());
}

double auc(const std::vector<double>& ms, const std::vector<bool>& labels) {
    if (ms.size() != labels.size()) throw MetricsError("confidence/label length mismatch");
    std::size_t pos = 0;
    for (bool l : labels) pos += l ? 1 : 0;
    std::size_t neg = ms.size() - pos;
    if (pos == 0 || neg == 0)
        throw MetricsError("AuC undefined: labels contain a single class");

    // Sweep thresholds downward through distinct confidence values,
    // integrating the ROC curve with trapezoids; a trapezoid over a tie
    // group credits each tied pair one half.
    std::vector<std::size_t> order(ms.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return ms[a] > ms[b]; });

    double area = 0.0;
    double tp = 0.0, fp = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        double tie_tp = 0.0, tie_fp = 0.0;
        while (j < order.size() && ms[order[j]] == ms[order[i]]) {
            if (labels[order[j]])
                tie_tp += 1.0;
            else
                tie_fp += 1.0;
            ++j;
        }
        area += tie_fp * (tp + tie_tp / 2.0);
        tp += tie_tp;
        fp += tie_fp;
        i = j;
    }
    return area / (static_cast<double>(pos) * static_cast<double>(neg));
}

std::string bin_summaries_csv(const BinSummary& s, const Binning& b) {
    std::ostringstream out;
    out.precision(12);
    out << "bin_lo,bin_hi,count,conf,occ\n";
    for (int k = 0; k < b.bin_count(); ++k) {
        if (s.bins[k].empty()) continue;
        out << b.edges[k] << ',' << b.edges[k + 1] << ',' << s.bins[k].count << ','
            << s.bins[k].conf << ',' << s.bins[k].occ << '\n';
    }
    return out.str();
}

}  // namespace coco
