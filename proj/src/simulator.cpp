#include "coco/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "coco/monitors.hpp"

namespace coco {

MCState mc_step(const MCState& s, double u, const MCParams& params, double eta_p, double eta_v,
                std::size_t* clip_count) {
    if (u < -1.0 || u > 1.0) {
        if (clip_count) ++(*clip_count);
        u = std::clamp(u, -1.0, 1.0);
    }
    MCState next;
    next.p = s.p + s.v + eta_p;  // pre-update velocity
    next.v = s.v + 0.0015 * u - params.z * std::cos(3.0 * s.p) + eta_v;
    next.t = s.t + 1;
    return next;
}

Observation mc_measure(const MCState& s, const MCParams& params) {
    return {s.p + params.c * s.v, s.v + params.d * s.p};
}

bool mc_safety(const std::vector<MCState>& states) {
    std::int64_t last_t = -1;
    for (const auto& s : states) {
        if (s.p >= kGoalPosition && s.t <= kSafetyHorizon) return true;
        last_t = std::max(last_t, s.t);
    }
    if (last_t < kSafetyHorizon)
        throw Error("malformed trace: ends at step " + std::to_string(last_t) +
                    " without reaching the goal");
    return false;
}

double default_controller(const Observation& obs) {
    if (obs.p_hat > 0.2) return 1.0;
    return obs.v_hat >= 0.0 ? 1.0 : -1.0;
}

Controller load_mlp_controller(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open controller file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(path + ": " + e.what());
    }
    if (!j.is_array() || j.empty())
        throw SchemaError(path + ": expected a non-empty array of layers");

    struct Layer {
        std::vector<std::vector<double>> w;
        std::vector<double> b;
    };
    std::vector<Layer> layers;
    std::size_t in_dim = 2;
    for (const auto& lj : j) {
        Layer l;
        try {
            l.w = lj.at("W").get<std::vector<std::vector<double>>>();
            l.b = lj.at("b").get<std::vector<double>>();
        } catch (const nlohmann::json::exception& e) {
            throw SchemaError(path + ": " + e.what());
        }
        if (l.w.size() != l.b.size()) throw SchemaError(path + ": W/b row mismatch");
        for (const auto& row : l.w)
            if (row.size() != in_dim)
                throw SchemaError(path + ": layer expects input width " +
                                  std::to_string(in_dim) + ", weight row has " +
                                  std::to_string(row.size()));
        in_dim = l.w.size();
        layers.push_back(std::move(l));
    }
    if (layers.back().w.size() != 1)
        throw SchemaError(path + ": final layer must produce a single action");

    return [layers = std::move(layers)](const Observation& obs) {
        std::vector<double> x{obs.p_hat, obs.v_hat};
        for (std::size_t li = 0; li < layers.size(); ++li) {
            const auto& l = layers[li];
            std::vector<double> y(l.w.size());
            for (std::size_t r = 0; r < l.w.size(); ++r) {
                double acc = l.b[r];
                for (std::size_t c = 0; c < x.size(); ++c) acc += l.w[r][c] * x[c];
                y[r] = (li + 1 < layers.size()) ? std::tanh(acc) : acc;
            }
            x = std::move(y);
        }
        return std::clamp(x[0], -1.0, 1.0);
    };
}

bool AssumptionPredicate::contains(const std::vector<double>& point) const {
    for (const auto& box : boxes) {
        if (box.lo.size() != point.size()) continue;
        bool inside = true;
        for (std::size_t i = 0; i < point.size() && inside; ++i)
            inside = point[i] >= box.lo[i] && point[i] <= box.hi[i];
        if (inside) return true;
    }
    return false;
}

std::string AssumptionPredicate::to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& box : boxes) j.push_back({{"lo", box.lo}, {"hi", box.hi}});
    return j.dump();
}

AssumptionPredicate AssumptionPredicate::from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    AssumptionPredicate p;
    for (const auto& bj : j)
        p.boxes.push_back(
            {bj.at("lo").get<std::vector<double>>(), bj.at("hi").get<std::vector<double>>()});
    return p;
}

std::vector<MCState> simulate_noise_free(double p0, const MCParams& params,
                                         const Controller& controller) {
    std::vector<MCState> states;
    MCState s{p0, 0.0, 0};
    states.push_back(s);
    while (s.p < kGoalPosition && s.t < kSafetyHorizon) {
        double u = controller(mc_measure(s, params));
        s = mc_step(s, u, params, 0.0, 0.0);
        states.push_back(s);
    }
    return states;
}

namespace {

bool corners_safe(double p0, double c, double d, const Controller& controller) {
    // Region semantics: safe under the nominal model; model validity is the
    // separate assumption a2, so the conjunction covers off-nominal hills.
    MCParams params{kNominalSteepness, c, d, 0.0, 0.0};
    return mc_safety(simulate_noise_free(p0, params, controller));
}

}  // namespace

AssumptionPredicate build_assumption_region(const RegionGrid& grid,
                                            const Controller& controller) {
    if (grid.res_p0 < 2 || grid.res_c < 2 || grid.res_d < 2)
        throw ConfigError("region grid resolution must be >= 2 per dimension");
    auto edge = [](double lo, double hi, int res, int i) {
        return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(res);
    };

    // Safety of every grid node under the nominal model, computed once.
    std::vector<bool> node_safe(static_cast<std::size_t>((grid.res_p0 + 1) * (grid.res_c + 1) *
                                                         (grid.res_d + 1)));
    auto node_index = [&](int ip, int ic, int id) {
        return static_cast<std::size_t>((ip * (grid.res_c + 1) + ic) * (grid.res_d + 1) + id);
    };
    for (int ip = 0; ip <= grid.res_p0; ++ip)
        for (int ic = 0; ic <= grid.res_c; ++ic)
            for (int id = 0; id <= grid.res_d; ++id)
                node_safe[node_index(ip, ic, id)] =
                    corners_safe(edge(grid.p0_lo, grid.p0_hi, grid.res_p0, ip),
                                 edge(grid.c_lo, grid.c_hi, grid.res_c, ic),
                                 edge(grid.d_lo, grid.d_hi, grid.res_d, id), controller);

    AssumptionPredicate pred;
    for (int ip = 0; ip < grid.res_p0; ++ip)
        for (int ic = 0; ic < grid.res_c; ++ic)
            for (int id = 0; id < grid.res_d; ++id) {
                bool all_safe = true;
                for (int dp = 0; dp <= 1 && all_safe; ++dp)
                    for (int dc = 0; dc <= 1 && all_safe; ++dc)
                        for (int dd = 0; dd <= 1 && all_safe; ++dd)
                            all_safe = node_safe[node_index(ip + dp, ic + dc, id + dd)];
                if (!all_safe) continue;
                pred.boxes.push_back({{edge(grid.p0_lo, grid.p0_hi, grid.res_p0, ip),
                                       edge(grid.c_lo, grid.c_hi, grid.res_c, ic),
                                       edge(grid.d_lo, grid.d_hi, grid.res_d, id)},
                                      {edge(grid.p0_lo, grid.p0_hi, grid.res_p0, ip + 1),
                                       edge(grid.c_lo, grid.c_hi, grid.res_c, ic + 1),
                                       edge(grid.d_lo, grid.d_hi, grid.res_d, id + 1)}});
            }
    return pred;
}

bool region_cell_replay(const RegionGrid& grid, const Controller& controller, double p0,
                        double c, double d) {
    auto cell = [](double lo, double hi, int res, double x) {
        double w = (hi - lo) / static_cast<double>(res);
        int i = std::clamp(static_cast<int>((x - lo) / w), 0, res - 1);
        return std::pair<double, double>{lo + i * w, lo + (i + 1) * w};
    };
    auto [p_lo, p_hi] = cell(grid.p0_lo, grid.p0_hi, grid.res_p0, p0);
    auto [c_lo, c_hi] = cell(grid.c_lo, grid.c_hi, grid.res_c, c);
    auto [d_lo, d_hi] = cell(grid.d_lo, grid.d_hi, grid.res_d, d);
    for (double pc : {p_lo, p_hi})
        for (double cc : {c_lo, c_hi})
            for (double dc : {d_lo, d_hi})
                if (!corners_safe(pc, cc, dc, controller)) return false;
    return true;
}

std::string TraceRecord::to_json_lines() const {
    std::ostringstream out;
    out.precision(17);
    nlohmann::json header{{"safe", safe},
                          {"seed", seed.seed},
                          {"stream", seed.stream_id},
                          {"p0", p0},
                          {"z", params.z},
                          {"c", params.c},
                          {"d", params.d}};
    out << header.dump() << '\n';
    for (std::size_t i = 0; i < states.size(); ++i) {
        nlohmann::json line{{"t", states[i].t}, {"p", states[i].p}, {"v", states[i].v}};
        if (i < observations.size()) {
            line["p_hat"] = observations[i].p_hat;
            line["v_hat"] = observations[i].v_hat;
        }
        if (i < actions.size()) line["u"] = actions[i];
        if (i < monitor_values.size()) line["m"] = monitor_values[i];
        if (i < assumption_flags.size()) {
            std::vector<int> a;
            for (bool f : assumption_flags[i]) a.push_back(f ? 1 : 0);
            line["a"] = a;
        }
        out << line.dump() << '\n';
    }
    return out.str();
}

CollectResult collect_dataset(const CollectConfig& config, const AssumptionPredicate& region) {
    if (config.episodes == 0) throw ConfigError("episode count must be positive");
    Controller controller = config.controller_path
                                ? load_mlp_controller(*config.controller_path)
                                : Controller(default_controller);

    CollectResult result;
    result.dataset.monitor_count = 2;
    result.dataset.metadata["seed"] = std::to_string(config.seed.seed);
    result.dataset.metadata["scenario"] = "mountain-car";

    PriorRanges priors{config.region_grid.p0_lo, config.region_grid.p0_hi,
                       config.region_grid.c_lo, config.region_grid.c_hi,
                       config.region_grid.d_lo, config.region_grid.d_hi};

    for (std::size_t ep = 0; ep < config.episodes; ++ep) {
        RngSeed ep_seed{config.seed.seed, config.seed.stream_id * 1000003 + ep};
        std::mt19937_64 rng(mix_seed(ep_seed));
        std::uniform_real_distribution<double> u_p0(priors.p0_lo, priors.p0_hi);
        std::uniform_real_distribution<double> u_c(priors.c_lo, priors.c_hi);
        std::uniform_real_distribution<double> u_d(priors.d_lo, priors.d_hi);
        std::bernoulli_distribution steep(0.5);
        std::normal_distribution<double> noise_p(0.0, config.process_sigma_p);
        std::normal_distribution<double> noise_v(0.0, config.process_sigma_v);

        TraceRecord trace;
        trace.seed = ep_seed;
        trace.p0 = u_p0(rng);
        trace.params.c = u_c(rng);
        trace.params.d = u_d(rng);
        trace.params.z = steep(rng) ? kSteepSteepness : kNominalSteepness;
        trace.params.sigma_p = config.process_sigma_p;
        trace.params.sigma_v = config.process_sigma_v;

        bool a1 = region.contains({trace.p0, trace.params.c, trace.params.d});
        bool a2 = trace.params.z == kNominalSteepness;

        auto monitor = mc_monitor_init(priors, config.mc_monitor_samples,
                                       {ep_seed.seed, ep_seed.stream_id + 500000009});
        // Region membership per hypothesis is fixed for the whole episode.
        std::vector<char> sample_in_region(monitor.samples.size());
        for (std::size_t i = 0; i < monitor.samples.size(); ++i)
            sample_in_region[i] = region.contains(monitor.samples[i].params) ? 1 : 0;

        InvalidationConfig inv;
        inv.window = config.invalidation_window;
        inv.epsilon = config.invalidation_epsilon;
        inv.resolution = config.invalidation_resolution;
        inv.budget = config.invalidation_budget;
        inv.c_lo = priors.c_lo;
        inv.c_hi = priors.c_hi;
        inv.d_lo = priors.d_lo;
        inv.d_hi = priors.d_hi;
        std::deque<WindowSample> window;

        MCState s{trace.p0, 0.0, 0};
        trace.states.push_back(s);
        while (s.p < kGoalPosition && s.t < kSafetyHorizon) {
            Observation obs = mc_measure(s, trace.params);
            trace.observations.push_back(obs);

            double m2 = 1.0;
            window.push_back({obs, 0.0});
            if (static_cast<int>(window.size()) > inv.window) window.pop_front();
            if (static_cast<int>(window.size()) == inv.window)
                m2 = invalidation_monitor({window.begin(), window.end()}, inv);

            double action = std::clamp(controller(obs), -1.0, 1.0);
            window.back().action = action;
            trace.actions.push_back(action);

            mc_monitor_update(monitor, obs, action, kNominalSteepness,
                              2.0 * config.process_sigma_p, 2.0 * config.process_sigma_v);
            double m1 = 0.0;
            for (std::size_t i = 0; i < monitor.samples.size(); ++i)
                if (sample_in_region[i]) m1 += monitor.samples[i].weight;
            m1 = std::clamp(m1, 0.0, 1.0);

            trace.monitor_values.push_back({m1, m2});
            trace.assumption_flags.push_back({a1, a2});

            s = mc_step(s, action, trace.params, noise_p(rng), noise_v(rng));
            trace.states.push_back(s);
        }
        trace.safe = mc_safety(trace.states);

        for (std::size_t t = 0; t < trace.monitor_values.size(); ++t) {
            MonitorSample row;
            row.trace_id = static_cast<std::int64_t>(ep);
            row.step = static_cast<std::int64_t>(t);
            row.monitor_values = trace.monitor_values[t];
            row.assumption_flags = trace.assumption_flags[t];
            row.safety_flag = trace.safe;
            result.dataset.samples.push_back(std::move(row));
        }
        result.traces.push_back(std::move(trace));
    }
    return result;
}

}  // namespace coco
