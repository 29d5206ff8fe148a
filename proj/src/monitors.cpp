#include "coco/monitors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace coco {

McMonitorState mc_monitor_init(const PriorRanges& ranges, std::size_t sample_count,
                               const RngSeed& seed) {
    if (sample_count == 0) throw ConfigError("need at least one Monte-Carlo sample");
    if (!(ranges.p0_lo <= ranges.p0_hi && ranges.c_lo <= ranges.c_hi &&
          ranges.d_lo <= ranges.d_hi))
        throw ConfigError("invalid prior ranges");

    std::mt19937_64 rng(mix_seed(seed));
    std::uniform_real_distribution<double> u_p0(ranges.p0_lo, ranges.p0_hi);
    std::uniform_real_distribution<double> u_c(ranges.c_lo, ranges.c_hi);
    std::uniform_real_distribution<double> u_d(ranges.d_lo, ranges.d_hi);

    McMonitorState state;
    state.samples.resize(sample_count);
    double w = 1.0 / static_cast<double>(sample_count);
    for (auto& s : state.samples) {
        double p0 = u_p0(rng);
        s.params = {p0, u_c(rng), u_d(rng)};
        s.state = {p0, 0.0, 0};
        s.weight = w;
    }
    return state;
}

void mc_monitor_update(McMonitorState& state, const Observation& obs, double action,
                       double nominal_z, double sigma_w_p, double sigma_w_v) {
    if (state.samples.empty()) throw Error("uninitialized monitor state");
    // Reweight on the current observation, shifting log-likelihoods by their
    // maximum so concentrated residuals cannot underflow all weights at once.
    std::vector<double> loglik(state.samples.size());
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < state.samples.size(); ++i) {
        const auto& s = state.samples[i];
        MCParams params{nominal_z, s.params[1], s.params[2], 0.0, 0.0};
        Observation pred = mc_measure(s.state, params);
        double rp = (obs.p_hat - pred.p_hat) / sigma_w_p;
        double rv = (obs.v_hat - pred.v_hat) / sigma_w_v;
        loglik[i] = -0.5 * (rp * rp + rv * rv);
        best = std::max(best, loglik[i]);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < state.samples.size(); ++i) {
        state.samples[i].weight *= std::exp(loglik[i] - best);
        total += state.samples[i].weight;
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
        double w = 1.0 / static_cast<double>(state.samples.size());
        for (auto& s : state.samples) s.weight = w;
        state.degenerate = true;
    } else {
        for (auto& s : state.samples) s.weight /= total;
    }

    // Advance every hypothesis deterministically under its own parameters.
    for (auto& s : state.samples) {
        MCParams params{nominal_z, s.params[1], s.params[2], 0.0, 0.0};
        s.state = mc_step(s.state, action, params, 0.0, 0.0);
    }
}

double mc_monitor_confidence(const McMonitorState& state, const AssumptionPredicate& pred) {
    if (state.samples.empty()) throw Error("uninitialized monitor state");
    double total = 0.0;
    for (const auto& s : state.samples)
        if (pred.contains(s.params)) total += s.weight;
    return std::clamp(total, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Particle filter monitor

PfState pf_monitor_init(const PriorRanges& ranges, std::size_t particle_count,
                        const RngSeed& seed) {
    if (particle_count == 0) throw ConfigError("need at least one particle");
    std::mt19937_64 rng(mix_seed(seed));
    std::uniform_real_distribution<double> u_p0(ranges.p0_lo, ranges.p0_hi);

    PfState state;
    state.particles.resize(particle_count);
    double w = 1.0 / static_cast<double>(particle_count);
    for (auto& p : state.particles) {
        p.state = {u_p0(rng), 0.0, 0};
        p.weight = w;
    }
    state.rng_state = rng();
    return state;
}

double pf_effective_sample_size(const PfState& state) {
    double ss = 0.0;
    for (const auto& p : state.particles) ss += p.weight * p.weight;
    return ss > 0.0 ? 1.0 / ss : 0.0;
}

namespace {

void systematic_resample(PfState& state, std::mt19937_64& rng) {
    const std::size_t n = state.particles.size();
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double start = unif(rng) / static_cast<double>(n);
    std::vector<Particle> next;
    next.reserve(n);
    double cum = state.particles[0].weight;
    std::size_t idx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double target = start + static_cast<double>(i) / static_cast<double>(n);
        while (cum < target && idx + 1 < n) cum += state.particles[++idx].weight;
        next.push_back(state.particles[idx]);
        next.back().weight = 1.0 / static_cast<double>(n);
    }
    state.particles = std::move(next);
}

}  // namespace

void pf_monitor_step(PfState& state, const Observation& obs, double action,
                     const PfConfig& cfg) {
    if (state.particles.empty()) throw Error("uninitialized particle filter");
    std::mt19937_64 rng(state.rng_state);
    std::normal_distribution<double> noise_p(0.0, cfg.sigma_p);
    std::normal_distribution<double> noise_v(0.0, cfg.sigma_v);

    // Reweight against the current observation.
    std::vector<double> loglik(state.particles.size());
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < state.particles.size(); ++i) {
        const auto& p = state.particles[i];
        double rp = (obs.p_hat - p.state.p) / cfg.sigma_w_p;
        double rv = (obs.v_hat - p.state.v) / cfg.sigma_w_v;
        loglik[i] = -0.5 * (rp * rp + rv * rv);
        best = std::max(best, loglik[i]);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < state.particles.size(); ++i) {
        state.particles[i].weight *= std::exp(loglik[i] - best);
        total += state.particles[i].weight;
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
        double w = 1.0 / static_cast<double>(state.particles.size());
        for (auto& p : state.particles) p.weight = w;
        state.degenerate = true;
    } else {
        for (auto& p : state.particles) p.weight /= total;
    }

    // Resample on strict ESS shortfall only.
    double ess = pf_effective_sample_size(state);
    if (ess < cfg.resample_threshold * static_cast<double>(state.particles.size()))
        systematic_resample(state, rng);

    // Propagate with process noise.
    MCParams params{cfg.nominal_z, 0.0, 0.0, cfg.sigma_p, cfg.sigma_v};
    for (auto& p : state.particles)
        p.state = mc_step(p.state, action, params, noise_p(rng), noise_v(rng));

    state.rng_state = rng();
}

double pf_monitor_confidence(const PfState& state, const AssumptionPredicate& pred) {
    if (state.particles.empty()) throw Error("uninitialized particle filter");
    double total = 0.0;
    for (const auto& p : state.particles)
        if (pred.contains({p.state.p, p.state.v})) total += p.weight;
    return std::clamp(total, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Model-invalidation monitor

namespace {

// Bit-reversal permutation index, so partial grid exploration is
// space-covering rather than a lexicographic sweep.
std::size_t bit_reverse(std::size_t value, int bits) {
    std::size_t out = 0;
    for (int i = 0; i < bits; ++i) {
        out = (out << 1) | (value & 1);
        value >>= 1;
    }
    return out;
}

}  // namespace

double invalidation_monitor(const std::vector<WindowSample>& window,
                            const InvalidationConfig& cfg) {
    if (cfg.window < 2 || cfg.epsilon <= 0.0 || cfg.resolution < 1)
        throw ConfigError("invalid invalidation config");
    if (static_cast<int>(window.size()) != cfg.window)
        throw ConfigError("window length " + std::to_string(window.size()) +
                          " does not match configured L=" + std::to_string(cfg.window));
    if (cfg.budget <= 0) throw ConfigError("exploration budget must be positive");

    const int res = cfg.resolution;
    auto grid_value = [res](double lo, double hi, int i) {
        if (res == 1) return (lo + hi) / 2.0;
        return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(res - 1);
    };

    const std::size_t total =
        static_cast<std::size_t>(res) * res * res * res;  // (c, d, dp, dv)
    int bits = 0;
    while ((1ULL << bits) < total) ++bits;

    std::size_t explored = 0;
    for (std::size_t raw = 0; raw < (1ULL << bits) && explored < static_cast<std::size_t>(cfg.budget);
         ++raw) {
        std::size_t flat = bit_reverse(raw, bits);
        if (flat >= total) continue;
        int iv = static_cast<int>(flat % res);
        flat /= res;
        int ip = static_cast<int>(flat % res);
        flat /= res;
        int id = static_cast<int>(flat % res);
        flat /= res;
        int ic = static_cast<int>(flat);

        double c = grid_value(cfg.c_lo, cfg.c_hi, ic);
        double d = grid_value(cfg.d_lo, cfg.d_hi, id);
        double dp = grid_value(-cfg.state_slack_p, cfg.state_slack_p, ip);
        double dv = grid_value(-cfg.state_slack_v, cfg.state_slack_v, iv);
        ++explored;

        // Invert the first observation for the window-initial state, then
        // perturb by the grid offset.
        double denom = 1.0 - c * d;
        if (std::abs(denom) < 1e-9) continue;  // explored, inconsistent
        MCState s;
        s.p = (window[0].obs.p_hat - c * window[0].obs.v_hat) / denom + dp;
        s.v = (window[0].obs.v_hat - d * window[0].obs.p_hat) / denom + dv;
        s.t = 0;

        MCParams params{cfg.nominal_z, c, d, 0.0, 0.0};
        bool consistent = true;
        for (std::size_t k = 0; k < window.size() && consistent; ++k) {
            Observation pred = mc_measure(s, params);
            if (std::abs(pred.p_hat - window[k].obs.p_hat) > cfg.epsilon ||
                std::abs(pred.v_hat - window[k].obs.v_hat) > cfg.epsilon)
                consistent = false;
            if (k + 1 < window.size()) s = mc_step(s, window[k].action, params, 0.0, 0.0);
        }
        if (consistent) return 1.0;
    }
    double fraction_invalidated =
        static_cast<double>(explored) / static_cast<double>(total);
    return std::clamp(1.0 - fraction_invalidated, 0.0, 1.0);
}

}  // namespace coco
