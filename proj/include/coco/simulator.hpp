#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "coco/core.hpp"

namespace coco {

struct MCState {
    double p = 0.0;  // position
    double v = 0.0;  // velocity
    std::int64_t t = 0;
};

struct Observation {
    double p_hat = 0.0;
    double v_hat = 0.0;
};

struct MCParams {
    double z = 0.0025;      // hill steepness, one of {0.0025, 0.0035}
    double c = 0.0;         // position-noise coefficient, in [-1, 1]
    double d = 0.0;         // velocity-noise coefficient, in [-0.01, 0.02]
    double sigma_p = 0.001;  // process noise std on position
    double sigma_v = 0.0001;  // process noise std on velocity
};

constexpr double kGoalPosition = 0.45;
constexpr std::int64_t kSafetyHorizon = 110;
constexpr double kNominalSteepness = 0.0025;
constexpr double kSteepSteepness = 0.0035;

// Controller maps the latest observation to an action in [-1, 1].
using Controller = std::function<double(const Observation&)>;

// One dynamics step; the position update uses the pre-update velocity.
// Out-of-range actions are clipped (clip_count, when given, is incremented).
MCState mc_step(const MCState& s, double u, const MCParams& params, double eta_p, double eta_v,
                std::size_t* clip_count = nullptr);

Observation mc_measure(const MCState& s, const MCParams& params);

// Safety: the trace reaches p >= 0.45 at some step t <= 110. Throws on a
// trace that neither reaches the goal nor covers the full horizon.
bool mc_safety(const std::vector<MCState>& states);

// Energy-pumping fallback policy: u = +1 if v_hat >= 0 else -1, overridden
// to +1 once p_hat > 0.2.
double default_controller(const Observation& obs);

// JSON MLP weights: layers of {"W": [[...]], "b": [...]}, tanh hidden
// activations, output clipped to [-1, 1]. Input is (p_hat, v_hat).
Controller load_mlp_controller(const std::string& path);

// Membership test over parameter vectors as a union of axis-aligned boxes.
struct AssumptionPredicate {
    struct Box {
        std::vector<double> lo, hi;
    };
    std::vector<Box> boxes;

    bool contains(const std::vector<double>& point) const;
    std::string to_json() const;
    static AssumptionPredicate from_json(const std::string& text);
};

struct RegionGrid {
    int res_p0 = 20, res_c = 10, res_d = 10;
    double p0_lo = -0.6, p0_hi = -0.4;
    double c_lo = -1.0, c_hi = 1.0;
    double d_lo = -0.01, d_hi = 0.02;
};

// Simulation-based surrogate for the verified assumption region over
// (p0, c, d): a grid cell is kept iff noise-free episodes from all 8 cell
// corners are safe under the nominal hill steepness.
AssumptionPredicate build_assumption_region(const RegionGrid& grid, const Controller& controller);

// Replays the 8 corner simulations of the cell containing the point;
// oracle for region membership in tests.
bool region_cell_replay(const RegionGrid& grid, const Controller& controller, double p0,
                        double c, double d);

// Noise-free closed-loop episode; returns the visited states.
std::vector<MCState> simulate_noise_free(double p0, const MCParams& params,
                                         const Controller& controller);

struct TraceRecord {
    std::vector<MCState> states;
    std::vector<Observation> observations;
    std::vector<double> actions;
    std::vector<std::vector<double>> monitor_values;      // per step
    std::vector<std::vector<bool>> assumption_flags;      // per step (constant here)
    bool safe = false;
    RngSeed seed;
    MCParams params;
    double p0 = 0.0;

    std::string to_json_lines() const;
};

struct CollectConfig {
    std::size_t episodes = 500;
    RngSeed seed;
    RegionGrid region_grid;
    // Invalidation monitor settings.
    int invalidation_window = 6;
    double invalidation_epsilon = 0.0025;
    int invalidation_resolution = 8;
    int invalidation_budget = 4096;
    // Monte-Carlo monitor settings.
    std::size_t mc_monitor_samples = 300;
    double process_sigma_p = 0.001;
    double process_sigma_v = 0.0001;
    std::optional<std::string> controller_path;  // MLP weights; default policy if unset
};

struct CollectResult {
    Dataset dataset;
    std::vector<TraceRecord> traces;
};

// Runs closed-loop episodes with process noise, attaches monitors m1
// (Monte-Carlo, initial-condition predicate) and m2 (model invalidation)
// per step, and labels a1 = region membership of (p0, c, d),
// a2 = (z == 0.0025), phi = episode safety.
CollectResult collect_dataset(const CollectConfig& config,
                              const AssumptionPredicate& region);

}  // namespace coco
