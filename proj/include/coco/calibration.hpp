#pragma once

#include <string>
#include <vector>

#include "coco/core.hpp"

namespace coco {

struct FitError : Error {
    using Error::Error;
};

// Platt transform m' = 1 / (1 + exp(c * LO(m) + d)); the identity transform
// is exactly (c = -1, d = 0).
struct CalibrationParams {
    double c = -1.0;
    double d = 0.0;
    double lambda = 0.5;  // conservatism weight in [0,1]

    std::string to_json() const;
    static CalibrationParams from_json(const std::string& text);
};

struct OptimizerSettings {
    double grad_tolerance = 1e-8;  // infinity norm
    int max_iterations = 10000;
    double clip_eps = 1e-6;  // confidence clipping before log-odds
};

// log(m / (1-m)) after clipping m to [eps, 1-eps].
double log_odds(double m, double eps = 1e-6);

double platt_apply(const CalibrationParams& p, double m, double eps = 1e-6);

// Weighted cross-entropy objective over calibrated scores:
//   L(c,d) = -sum_j (1-lambda) a_j log(m'_j) + lambda (1-a_j) log(1-m'_j)
// Convex in (c,d); minimized with full-batch gradient descent plus
// backtracking line search, starting at the identity transform.
CalibrationParams platt_fit(const std::vector<double>& ms, const std::vector<bool>& labels,
                            double lambda, const OptimizerSettings& opt = {});

// Objective and analytic gradient, exposed for finite-difference checks.
double platt_loss(const CalibrationParams& p, const std::vector<double>& ms,
                  const std::vector<bool>& labels, double eps = 1e-6);
std::pair<double, double> platt_gradient(const CalibrationParams& p,
                                         const std::vector<double>& ms,
                                         const std::vector<bool>& labels, double eps = 1e-6);

}  // namespace coco
