#pragma once

#include <vector>

#include "coco/core.hpp"
#include "coco/simulator.hpp"

namespace coco {

// One hypothesis of the Monte-Carlo initial-condition monitor: a sampled
// (p0, c, d) triple together with the state it has been advanced to.
struct ParamSample {
    std::vector<double> params;  // (p0, c, d)
    MCState state;
    double weight = 0.0;
};

struct McMonitorState {
    std::vector<ParamSample> samples;
    bool degenerate = false;  // weights underflowed and were reset to uniform
};

struct PriorRanges {
    double p0_lo = -0.6, p0_hi = -0.4;
    double c_lo = -1.0, c_hi = 1.0;
    double d_lo = -0.01, d_hi = 0.02;
};

// Uniform Monte-Carlo sample of (p0, c, d) with equal weights.
McMonitorState mc_monitor_init(const PriorRanges& ranges, std::size_t sample_count,
                               const RngSeed& seed);

// Advances each hypothesis deterministically (no process noise) under its
// own parameters with the executed action, then reweights by a Gaussian
// kernel of the observation residual.
void mc_monitor_update(McMonitorState& state, const Observation& obs, double action,
                       double nominal_z, double sigma_w_p, double sigma_w_v);

double mc_monitor_confidence(const McMonitorState& state, const AssumptionPredicate& pred);

// ---------------------------------------------------------------------------
// Particle filter monitor over the current state.

struct Particle {
    MCState state;
    double weight = 0.0;
};

struct PfState {
    std::vector<Particle> particles;
    std::uint64_t rng_state = 0;  // advanced deterministically across steps
    bool degenerate = false;
};

struct PfConfig {
    double sigma_p = 0.001;   // process noise injected during propagation
    double sigma_v = 0.0001;
    double sigma_w_p = 0.002;  // observation likelihood kernel
    double sigma_w_v = 0.0002;
    double nominal_z = 0.0025;
    double resample_threshold = 0.5;  // resample when ESS < threshold * M
};

PfState pf_monitor_init(const PriorRanges& ranges, std::size_t particle_count,
                        const RngSeed& seed);

void pf_monitor_step(PfState& state, const Observation& obs, double action,
                     const PfConfig& cfg);

double pf_effective_sample_size(const PfState& state);

// Weight fraction of particles whose current (p, v) satisfies the predicate.
double pf_monitor_confidence(const PfState& state, const AssumptionPredicate& pred);

// ---------------------------------------------------------------------------
// Window-based model-invalidation monitor.

struct InvalidationConfig {
    int window = 6;           // L
    double epsilon = 0.0025;  // residual tolerance, infinity norm
    int resolution = 8;       // grid resolution per dimension
    int budget = 4096;        // grid points explored before giving up
    double nominal_z = 0.0025;
    double c_lo = -1.0, c_hi = 1.0;
    double d_lo = -0.01, d_hi = 0.02;
    // Window-initial state offsets searched around the inversion of the
    // first observation. The velocity slack is kept near the per-step
    // velocity noise scale so hill-steepness drift cannot be absorbed.
    double state_slack_p = 0.002;
    double state_slack_v = 0.0003;
};

struct WindowSample {
    Observation obs;
    double action = 0.0;  // action taken after this observation
};

// Grid-searches (c, d, initial-state offset) for a parameterization whose
// noise-free simulation reproduces every window observation within epsilon.
// Returns 1 when a consistent point is found, otherwise
// 1 - (fraction of the grid explored and found inconsistent).
double invalidation_monitor(const std::vector<WindowSample>& window,
                            const InvalidationConfig& cfg);

}  // namespace coco
