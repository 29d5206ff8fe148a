#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "coco/bounds.hpp"
#include "coco/calibration.hpp"
#include "coco/core.hpp"
#include "coco/harness.hpp"
#include "coco/metrics.hpp"
#include "coco/simulator.hpp"
#include "toml_lite.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw coco::Error("cannot write " + path.string());
    out << text;
}

coco::Controller make_controller(const coco::CollectConfig& cfg) {
    if (cfg.controller_path) return coco::load_mlp_controller(*cfg.controller_path);
    return coco::default_controller;
}

std::string lambda_tag(double lambda) {
    std::string s = std::to_string(lambda);
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    for (auto& ch : s)
        if (ch == '.') ch = 'p';
    return s;
}

std::string sanitize(std::string s) {
    for (auto& ch : s)
        if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '_';
    return s;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
    auto cfg = coco::ExperimentConfig::from_toml_file(config_path);
    fs::create_directories(out_dir);

    auto controller = make_controller(cfg.simulate);
    auto region = coco::build_assumption_region(cfg.simulate.region_grid, controller);
    auto result = coco::collect_dataset(cfg.simulate, region);

    coco::save_dataset(result.dataset, (fs::path(out_dir) / "data.csv").string(),
                       coco::FileFormat::Csv);
    write_file(fs::path(out_dir) / "region.json", region.to_json());

    std::size_t safe = 0;
    for (const auto& t : result.traces) safe += t.safe ? 1 : 0;
    std::cout << "wrote " << result.dataset.size() << " samples from "
              << result.traces.size() << " episodes (" << safe << " safe) to " << out_dir
              << "/data.csv\n";
    return kExitOk;
}

int cmd_run(const std::string& config_path, const std::string& data_path,
            const std::string& out_dir) {
    auto cfg = coco::ExperimentConfig::from_toml_file(config_path);
    fs::create_directories(out_dir);

    auto format = data_path.size() >= 5 && data_path.substr(data_path.size() - 5) == ".json"
                      ? coco::FileFormat::Json
                      : coco::FileFormat::Csv;
    auto data = coco::load_dataset(data_path, format);

    auto result = coco::run_experiment(cfg, data);
    for (const auto& table : result.tables) {
        std::string stem = "results_lambda" + lambda_tag(table.lambda);
        coco::emit_table(table, coco::TableFormat::Csv,
                         (fs::path(out_dir) / (stem + ".csv")).string());
        coco::emit_table(table, coco::TableFormat::Json,
                         (fs::path(out_dir) / (stem + ".json")).string());
        coco::emit_table(table, coco::TableFormat::Markdown,
                         (fs::path(out_dir) / (stem + ".md")).string());
        std::cout << "lambda = " << table.lambda << " (" << table.repetitions_used
                  << " repetitions, " << table.repetitions_skipped << " skipped)\n"
                  << coco::format_table(table, coco::TableFormat::Markdown) << '\n';
    }

    coco::Binning binning = coco::Binning::uniform(cfg.bin_count);
    for (const auto& [key, diag] : result.diagnostics)
        write_file(fs::path(out_dir) / ("reliability_" + sanitize(key) + ".csv"),
                   coco::reliability_csv(diag, binning));
    return kExitOk;
}

int cmd_bounds(const std::string& theorem, double e1, double e2, double e3, double e, double var1,
               double var2, double w1, double w2, double x) {
    auto print = [](const coco::BoundResult& r) {
        std::cout << r.value;
        if (r.vacuous) std::cout << " (vacuous)";
        std::cout << '\n';
    };
    if (theorem == "ece_product") {
        print(coco::ece_product_bound({e1, var1}, {e2, var2}));
    } else if (theorem == "ece_weighted") {
        print(coco::ece_weighted_bound(e1, e2, w1, w2));
    } else if (theorem == "cce_product") {
        print(coco::cce_product_bound(e1, e2));
    } else if (theorem == "cce_pointwise") {
        std::cout << coco::cce_product_pointwise(x, e1, e2) << '\n';
    } else if (theorem == "safety") {
        std::cout << coco::safety_bound(e1, e2) << '\n';
    } else if (theorem == "ece_end_to_end") {
        std::cout << coco::ece_end_to_end(e1, e2, e3) << '\n';
    } else if (theorem == "cce_end_to_end") {
        std::cout << coco::cce_end_to_end(e) << '\n';
    } else {
        throw coco::ConfigError("unknown theorem '" + theorem + "'");
    }
    return kExitOk;
}

int cmd_bounds_verify(const std::string& config_path, const std::string& out_path) {
    auto t = coco::detail::TomlLite::parse_file(config_path);
    std::string composition = t.get_string("composition", "product");
    std::string bound = t.get_string("bound", "ece_product");
    int spaces = static_cast<int>(t.get_number("spaces", 20));
    auto samples = static_cast<std::size_t>(t.get_number("samples", 100000));
    int bins = static_cast<int>(t.get_number("bins", 10));
    auto seed = static_cast<std::uint64_t>(t.get_number("seed", 7));
    double bias_max = t.get_number("bias_max", 0.15);
    if (spaces < 1) throw coco::ConfigError("spaces must be >= 1");

    std::mt19937_64 rng(coco::mix_seed({seed, 0}));
    std::uniform_real_distribution<double> u_shape(1.0, 5.0);
    std::uniform_real_distribution<double> u_bias(-bias_max, bias_max);

    auto reports = nlohmann::json::array();
    int failures = 0;
    for (int i = 0; i < spaces; ++i) {
        coco::SyntheticSpace space;
        space.alpha1 = u_shape(rng);
        space.beta1 = u_shape(rng);
        space.bias1 = u_bias(rng);
        space.alpha2 = u_shape(rng);
        space.beta2 = u_shape(rng);
        space.bias2 = u_bias(rng);
        space.sample_count = samples;
        space.seed = {seed, static_cast<std::uint64_t>(i + 1)};
        auto report = coco::verify_bound_empirically(space, composition, bound, bins);
        if (!report.pass) ++failures;
        reports.push_back(nlohmann::json::parse(report.to_json()));
    }

    nlohmann::json j;
    j["composition"] = composition;
    j["bound"] = bound;
    j["spaces"] = spaces;
    j["failures"] = failures;
    j["reports"] = std::move(reports);
    std::string text = j.dump(2) + "\n";
    if (out_path.empty())
        std::cout << text;
    else
        write_file(out_path, text);
    if (failures > 0) {
        std::cerr << failures << " of " << spaces << " spaces exceeded the bound\n";
        return kExitData;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"calibrated composition of assumption monitors"};
    app.require_subcommand(1);

    std::string config_path, data_path, out_dir, out_path;
    std::string theorem;
    double e1 = 0, e2 = 0, e3 = 0, e = 0, var1 = 0, var2 = 0, w1 = 0.5, w2 = 0.5, x = 0.5;

    auto* simulate = app.add_subcommand("simulate", "collect a monitored mountain-car dataset");
    simulate->add_option("--config", config_path, "experiment config (TOML)")->required();
    simulate->add_option("--out", out_dir, "output directory")->required();

    auto* run = app.add_subcommand("run", "cross-validation experiment over a dataset");
    run->add_option("--config", config_path, "experiment config (TOML)")->required();
    run->add_option("--data", data_path, "dataset file (CSV or JSON)")->required();
    run->add_option("--out", out_dir, "output directory")->required();

    auto* bounds = app.add_subcommand("bounds", "closed-form composition error bounds");
    bounds->add_option("--theorem", theorem,
                       "ece_product | ece_weighted | cce_product | cce_pointwise | safety | "
                       "ece_end_to_end | cce_end_to_end");
    bounds->add_option("--e1", e1, "monitor 1 MCE bound");
    bounds->add_option("--e2", e2, "monitor 2 MCE bound");
    bounds->add_option("--e3", e3, "third error term (end-to-end ECE)");
    bounds->add_option("--e", e, "error term (end-to-end CCE)");
    bounds->add_option("--var1", var1, "monitor 1 variance");
    bounds->add_option("--var2", var2, "monitor 2 variance");
    bounds->add_option("--w1", w1, "weight of monitor 1");
    bounds->add_option("--w2", w2, "weight of monitor 2");
    bounds->add_option("--x", x, "composed confidence (pointwise bound)");

    auto* verify = bounds->add_subcommand("verify", "Monte-Carlo verification on synthetic spaces");
    verify->add_option("--config", config_path, "verification config (TOML)")->required();
    verify->add_option("--out", out_path, "JSON report file (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        return app.exit(err) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*simulate) return cmd_simulate(config_path, out_dir);
        if (*run) return cmd_run(config_path, data_path, out_dir);
        if (*verify) return cmd_bounds_verify(config_path, out_path);
        if (*bounds) {
            if (theorem.empty()) throw coco::ConfigError("--theorem is required");
            return cmd_bounds(theorem, e1, e2, e3, e, var1, var2, w1, w2, x);
        }
    } catch (const coco::ConfigError& err) {
        std::cerr << "config error: " << err.what() << '\n';
        return kExitConfig;
    } catch (const coco::SyntaxError& err) {
        std::cerr << "config error: " << err.what() << '\n';
        return kExitConfig;
    } catch (const coco::Error& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitData;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitData;
    }
    return kExitConfig;
}
