#include "coco/composition.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "wlogistic.hpp"

namespace coco {

double product(const std::vector<double>& ms) {
    if (ms.empty()) throw Error("product of an empty monitor list");
    double p = 1.0;
    for (double m : ms) p *= m;
    return p;
}

double power_product(const std::vector<double>& ms) {
    double p = product(ms);
    return std::pow(p, static_cast<double>(ms.size()));
}

WeightVector inverse_variance_weights(const std::vector<double>& variances,
                                      double variance_floor) {
    if (variances.empty()) throw Error("no variances given");
    WeightVector w;
    double total = 0.0;
    for (double v : variances) {
        if (v < 0.0) throw RangeError("negative variance");
        double inv = 1.0 / std::max(v, variance_floor);
        w.weights.push_back(inv);
        total += inv;
    }
    for (double& x : w.weights) x /= total;
    return w;
}

double weighted_average(const std::vector<double>& ms, const WeightVector& w) {
    if (ms.size() != w.weights.size()) throw Error("monitor/weight length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < ms.size(); ++i) s += w.weights[i] * ms[i];
    return s;
}

std::string LogRegParams::to_json() const {
    nlohmann::json j{{"w0", intercept}, {"w", coefficients}, {"lambda", lambda}};
    return j.dump();
}

LogRegParams LogRegParams::from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    LogRegParams p;
    p.intercept = j.at("w0").get<double>();
    p.coefficients = j.at("w").get<std::vector<double>>();
    p.lambda = j.at("lambda").get<double>();
    return p;
}

LogRegParams logreg_fit(const std::vector<std::vector<double>>& monitor_rows,
                        const std::vector<bool>& conjunction_labels, double lambda,
                        const OptimizerSettings& opt) {
    if (monitor_rows.size() != conjunction_labels.size())
        throw FitError("row/label length mismatch");
    if (monitor_rows.empty()) throw FitError("empty fitting data");

    const std::size_t n = monitor_rows.front().size();
    std::vector<std::vector<double>> rows;
    rows.reserve(monitor_rows.size());
    for (const auto& ms : monitor_rows) {
        if (ms.size() != n) throw FitError("inconsistent monitor row widths");
        std::vector<double> x;
        x.reserve(n + 1);
        x.push_back(1.0);  // intercept
        x.insert(x.end(), ms.begin(), ms.end());
        rows.push_back(std::move(x));
    }

    detail::WeightedLogisticProblem prob{&rows, &conjunction_labels, lambda};
    auto theta = detail::fit_weighted_logistic(prob, std::vector<double>(n + 1, 0.0), opt);
    LogRegParams p;
    p.intercept = theta[0];
    p.coefficients.assign(theta.begin() + 1, theta.end());
    p.lambda = lambda;
    return p;
}

double logreg_apply(const LogRegParams& p, const std::vector<double>& ms) {
    if (ms.size() != p.coefficients.size()) throw Error("monitor/coefficient length mismatch");
    double u = p.intercept;
    for (std::size_t i = 0; i < ms.size(); ++i) u += p.coefficients[i] * ms[i];
    return detail::sigmoid(u);
}

JointHistogram::JointHistogram(int dims, int bins_per_dim, double smoothing)
    : dims_(dims), bins_per_dim_(bins_per_dim), smoothing_(smoothing) {
    if (dims < 1) throw Error("histogram needs at least one dimension");
    if (bins_per_dim < 2) throw Error("histogram needs at least two bins per dimension");
    std::size_t cells = 1;
    for (int i = 0; i < dims; ++i) cells *= static_cast<std::size_t>(bins_per_dim);
    cond_counts_.assign(cells, 0.0);
    all_counts_.assign(cells, 0.0);
}

std::size_t JointHistogram::cell_of(const std::vector<double>& ms) const {
    if (static_cast<int>(ms.size()) != dims_) throw Error("histogram dimension mismatch");
    std::size_t idx = 0;
    for (double m : ms) {
        if (!(m >= 0.0 && m <= 1.0))
            throw RangeError("monitor value outside [0,1]: " + std::to_string(m));
        int b = std::min(static_cast<int>(m * bins_per_dim_), bins_per_dim_ - 1);
        idx = idx * static_cast<std::size_t>(bins_per_dim_) + static_cast<std::size_t>(b);
    }
    return idx;
}

void JointHistogram::add(const std::vector<double>& ms, bool conjunction_true) {
    std::size_t c = cell_of(ms);
    all_counts_[c] += 1.0;
    all_total_ += 1.0;
    if (conjunction_true) {
        cond_counts_[c] += 1.0;
        cond_total_ += 1.0;
    }
}

double JointHistogram::likelihood_ratio(const std::vector<double>& ms) const {
    std::size_t c = cell_of(ms);
    double cells = static_cast<double>(all_counts_.size());
    double cond_density = (cond_counts_[c] + smoothing_) / (cond_total_ + smoothing_ * cells);
    double all_density = (all_counts_[c] + smoothing_) / (all_total_ + smoothing_ * cells);
    double ratio = cond_density / all_density;
    return std::clamp(ratio, kRatioFloor, kRatioCap);
}

std::string JointHistogram::to_json() const {
    nlohmann::json j{{"dims", dims_},
                     {"bins_per_dim", bins_per_dim_},
                     {"smoothing", smoothing_},
                     {"cond_counts", cond_counts_},
                     {"all_counts", all_counts_},
                     {"cond_total", cond_total_},
                     {"all_total", all_total_}};
    return j.dump();
}

JointHistogram JointHistogram::from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    JointHistogram h(j.at("dims").get<int>(), j.at("bins_per_dim").get<int>(),
                     j.at("smoothing").get<double>());
    h.cond_counts_ = j.at("cond_counts").get<std::vector<double>>();
    h.all_counts_ = j.at("all_counts").get<std::vector<double>>();
    h.cond_total_ = j.at("cond_total").get<double>();
    h.all_total_ = j.at("all_total").get<double>();
    return h;
}

JointHistogram bayes_fit(const std::vector<std::vector<double>>& monitor_rows,
                         const std::vector<bool>& conjunction_labels, int bins_per_dim,
                         double smoothing) {
    if (monitor_rows.size() != conjunction_labels.size())
        throw FitError("row/label length mismatch");
    if (monitor_rows.empty()) throw FitError("empty fitting data");
    JointHistogram h(static_cast<int>(monitor_rows.front().size()), bins_per_dim, smoothing);
    for (std::size_t i = 0; i < monitor_rows.size(); ++i)
        h.add(monitor_rows[i], conjunction_labels[i]);
    return h;
}

double bayes_step(const JointHistogram& hist, double prior, const std::vector<double>& ms) {
    if (!(prior >= 0.0 && prior <= 1.0)) throw RangeError("prior outside [0,1]");
    return std::clamp(prior * hist.likelihood_ratio(ms), 0.0, 1.0);
}

}  // namespace coco
