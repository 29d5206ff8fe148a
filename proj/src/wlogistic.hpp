#pragma once

// Internal weighted logistic fitting shared by Platt scaling and the
// logistic-regression composition. Minimizes
//   L(theta) = -sum_j (1-lambda) a_j log(p_j) + lambda (1-a_j) log(1-p_j)
// with p_j = sigmoid(theta . x_j), by damped Newton steps with backtracking.
// The objective is convex, so the fit is deterministic.

#include <cmath>
#include <vector>

#include "coco/calibration.hpp"

namespace coco::detail {

inline double softplus(double z) {
    if (z > 35.0) return z;
    if (z < -35.0) return 0.0;
    return std::log1p(std::exp(z));
}

inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

struct WeightedLogisticProblem {
    const std::vector<std::vector<double>>* features = nullptr;  // rows, incl. intercept column
    const std::vector<bool>* labels = nullptr;
    double lambda = 0.5;

    double loss(const std::vector<double>& theta) const {
        double total = 0.0;
        for (std::size_t j = 0; j < features->size(); ++j) {
            double u = dot(theta, (*features)[j]);
            // log p = -softplus(-u), log(1-p) = -softplus(u)
            if ((*labels)[j])
                total += (1.0 - lambda) * softplus(-u);
            else
                total += lambda * softplus(u);
        }
        return total;
    }

    void gradient(const std::vector<double>& theta, std::vector<double>& grad) const {
        grad.assign(theta.size(), 0.0);
        for (std::size_t j = 0; j < features->size(); ++j) {
            const auto& x = (*features)[j];
            double p = sigmoid(dot(theta, x));
            double dldu = (*labels)[j] ? -(1.0 - lambda) * (1.0 - p) : lambda * p;
            for (std::size_t k = 0; k < theta.size(); ++k) grad[k] += dldu * x[k];
        }
    }

    // Dense Hessian, row-major.
    void hessian(const std::vector<double>& theta, std::vector<double>& hess) const {
        const std::size_t n = theta.size();
        hess.assign(n * n, 0.0);
        for (std::size_t j = 0; j < features->size(); ++j) {
            const auto& x = (*features)[j];
            double p = sigmoid(dot(theta, x));
            double w = ((*labels)[j] ? (1.0 - lambda) : lambda) * p * (1.0 - p);
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < n; ++c) hess[r * n + c] += w * x[r] * x[c];
        }
    }

    static double dot(const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    }
};

// Solves H s = g by Gaussian elimination with partial pivoting; returns false
// when the system is numerically singular.
inline bool solve_dense(std::vector<double> h, std::vector<double> g, std::vector<double>& s) {
    const std::size_t n = g.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(h[r * n + col]) > std::abs(h[piv * n + col])) piv = r;
        if (std::abs(h[piv * n + col]) < 1e-300) return false;
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(h[piv * n + c], h[col * n + c]);
            std::swap(g[piv], g[col]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            double f = h[r * n + col] / h[col * n + col];
            for (std::size_t c = col; c < n; ++c) h[r * n + c] -= f * h[col * n + c];
            g[r] -= f * g[col];
        }
    }
    s.assign(n, 0.0);
    for (std::size_t ri = n; ri-- > 0;) {
        double acc = g[ri];
        for (std::size_t c = ri + 1; c < n; ++c) acc -= h[ri * n + c] * s[c];
        s[ri] = acc / h[ri * n + ri];
    }
    return true;
}

// Returns the fitted theta. Termination: gradient infinity-norm below
// tolerance, a numerically stalled line search, or the iteration cap —
// the objective is convex, so the last iterate is the usable optimum in
// every case.
inline std::vector<double> fit_weighted_logistic(const WeightedLogisticProblem& prob,
                                                 std::vector<double> theta,
                                                 const OptimizerSettings& opt) {
    bool pos_seen = false, neg_seen = false;
    for (bool a : *prob.labels) (a ? pos_seen : neg_seen) = true;
    if (!pos_seen || !neg_seen)
        throw FitError("degenerate fit: labels contain a single class");

    std::vector<double> grad, hess, step;
    double loss = prob.loss(theta);
    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        prob.gradient(theta, grad);
        double gnorm = 0.0;
        for (double g : grad) gnorm = std::max(gnorm, std::abs(g));
        if (gnorm < opt.grad_tolerance) return theta;

        prob.hessian(theta, hess);
        if (!solve_dense(hess, grad, step)) {
            step = grad;  // gradient fallback when the Hessian is singular
        }
        // Backtracking on the Newton direction.
        double slope = 0.0;
        for (std::size_t k = 0; k < grad.size(); ++k) slope += grad[k] * step[k];
        double alpha = 1.0;
        std::vector<double> trial(theta.size());
        bool accepted = false;
        for (int bt = 0; bt < 60 && !accepted; ++bt) {
            for (std::size_t k = 0; k < theta.size(); ++k)
                trial[k] = theta[k] - alpha * step[k];
            double trial_loss = prob.loss(trial);
            if (trial_loss <= loss - 1e-4 * alpha * slope) {
                accepted = true;
                theta = trial;
                double gain = loss - trial_loss;
                loss = trial_loss;
                // Plateau detection: loss no longer improves at double
                // precision, so the gradient tolerance is out of reach.
                if (gain <= 1e-13 * (1.0 + std::abs(loss))) return theta;
            }
            alpha *= 0.5;
        }
        if (!accepted) return theta;  // line search stalled at the optimum
    }
    return theta;
}

}  // namespace coco::detail
