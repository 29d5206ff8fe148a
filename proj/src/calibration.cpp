#include "coco/calibration.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "wlogistic.hpp"

namespace coco {

std::string CalibrationParams::to_json() const {
    nlohmann::json j{{"c", c}, {"d", d}, {"lambda", lambda}};
    return j.dump();
}

CalibrationParams CalibrationParams::from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    CalibrationParams p;
    p.c = j.at("c").get<double>();
    p.d = j.at("d").get<double>();
    p.lambda = j.at("lambda").get<double>();
    return p;
}

double log_odds(double m, double eps) {
    if (!(eps > 0.0 && eps < 0.5)) throw RangeError("log-odds eps must lie in (0, 0.5)");
    m = std::clamp(m, eps, 1.0 - eps);
    return std::log(m / (1.0 - m));
}

double platt_apply(const CalibrationParams& p, double m, double eps) {
    double z = p.c * log_odds(m, eps) + p.d;
    return detail::sigmoid(-z);
}

namespace {

std::vector<std::vector<double>> platt_features(const std::vector<double>& ms, double eps) {
    std::vector<std::vector<double>> rows;
    rows.reserve(ms.size());
    for (double m : ms) rows.push_back({log_odds(m, eps), 1.0});
    return rows;
}

}  // namespace

double platt_loss(const CalibrationParams& p, const std::vector<double>& ms,
                  const std::vector<bool>& labels, double eps) {
    auto rows = platt_features(ms, eps);
    detail::WeightedLogisticProblem prob{&rows, &labels, p.lambda};
    // m' = sigmoid(-(c LO + d)) = sigmoid(theta . x) with theta = (-c, -d).
    return prob.loss({-p.c, -p.d});
}

std::pair<double, double> platt_gradient(const CalibrationParams& p,
                                         const std::vector<double>& ms,
                                         const std::vector<bool>& labels, double eps) {
    auto rows = platt_features(ms, eps);
    detail::WeightedLogisticProblem prob{&rows, &labels, p.lambda};
    std::vector<double> grad;
    prob.gradient({-p.c, -p.d}, grad);
    // Chain rule through theta = (-c, -d).
    return {-grad[0], -grad[1]};
}

CalibrationParams platt_fit(const std::vector<double>& ms, const std::vector<bool>& labels,
                            double lambda, const OptimizerSettings& opt) {
    if (ms.size() != labels.size()) throw FitError("confidence/label length mismatch");
    if (ms.size() < 2) throw FitError("need at least two samples to fit");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw RangeError("lambda must lie in [0,1]");

    auto rows = platt_features(ms, opt.clip_eps);
    detail::WeightedLogisticProblem prob{&rows, &labels, lambda};
    // Start at the identity transform (c=-1, d=0) i.e. theta=(1, 0).
    auto theta = detail::fit_weighted_logistic(prob, {1.0, 0.0}, opt);
    CalibrationParams p;
    p.c = -theta[0];
    p.d = -theta[1];
    p.lambda = lambda;
    return p;
}

}  // namespace coco
