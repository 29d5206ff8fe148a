#pragma once

#include <string>
#include <vector>

#include "coco/calibration.hpp"
#include "coco/core.hpp"

namespace coco {

// Normalized non-negative weights, summing to 1.
struct WeightVector {
    std::vector<double> weights;
};

struct LogRegParams {
    double intercept = 0.0;
    std::vector<double> coefficients;
    double lambda = 0.5;

    std::string to_json() const;
    static LogRegParams from_json(const std::string& text);
};

// Per-dimension histograms of the joint monitor distribution, unconditional
// and conditioned on the conjunction of assumptions holding.
class JointHistogram {
  public:
    JointHistogram() = default;
    JointHistogram(int dims, int bins_per_dim, double smoothing);

    void add(const std::vector<double>& ms, bool conjunction_true);

    // Laplace-smoothed density ratio p(ms | conj) / p(ms) for the cell
    // containing ms, clamped to [ratio_floor, ratio_cap].
    double likelihood_ratio(const std::vector<double>& ms) const;

    int dims() const { return dims_; }
    int bins_per_dim() const { return bins_per_dim_; }

    std::string to_json() const;
    static JointHistogram from_json(const std::string& text);

    static constexpr double kRatioFloor = 1e-3;
    static constexpr double kRatioCap = 1e3;

  private:
    std::size_t cell_of(const std::vector<double>& ms) const;

    int dims_ = 0;
    int bins_per_dim_ = 0;
    double smoothing_ = 1.0;
    std::vector<double> cond_counts_;  // conditioned on the conjunction
    std::vector<double> all_counts_;
    double cond_total_ = 0.0;
    double all_total_ = 0.0;
};

// Composition functions for conjunctions of assumptions.
double product(const std::vector<double>& ms);
double power_product(const std::vector<double>& ms);  // (prod m_i)^n for n monitors

WeightVector inverse_variance_weights(const std::vector<double>& variances,
                                      double variance_floor = 1e-6);
double weighted_average(const std::vector<double>& ms, const WeightVector& w);

LogRegParams logreg_fit(const std::vector<std::vector<double>>& monitor_rows,
                        const std::vector<bool>& conjunction_labels, double lambda,
                        const OptimizerSettings& opt = {});
double logreg_apply(const LogRegParams& p, const std::vector<double>& ms);

JointHistogram bayes_fit(const std::vector<std::vector<double>>& monitor_rows,
                         const std::vector<bool>& conjunction_labels, int bins_per_dim = 10,
                         double smoothing = 1.0);
// One multiplicative update of the running confidence along a trace; the
// prior is reset by the caller at each trace start.
double bayes_step(const JointHistogram& hist, double prior, const std::vector<double>& ms);

}  // namespace coco
