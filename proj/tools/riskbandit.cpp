#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "riskbandit/experiment.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;
constexpr int kIoError = 4;

}  // namespace

int main(int argc, char** argv) {
    using namespace riskbandit;

    CLI::App app{"Risk-constrained bandit experiments (RC-LCB, RCLCB-HT, Con-LCB)"};
    std::string config_path;
    std::string preset;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> horizon;
    std::optional<std::size_t> reps;
    std::optional<std::string> out_dir;
    bool quiet = false;
    bool list = false;
    bool dump = false;
    auto* cfg = app.add_option("--config", config_path, "Experiment file (JSON)");
    auto* pre = app.add_option("--preset", preset, "Built-in experiment (see --list-presets)");
    cfg->excludes(pre);
    app.add_option("--seed", seed, "Override base_seed");
    app.add_option("--horizon", horizon, "Override the horizon list with a single T");
    app.add_option("--reps", reps, "Override the number of repetitions");
    app.add_option("--out", out_dir, "Output directory (overrides outputs.dir)");
    app.add_flag("--quiet", quiet, "Do not print the summary table");
    app.add_flag("--list-presets", list, "Print preset names and exit");
    app.add_flag("--dump-config", dump, "Print the effective configuration as JSON and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    if (list) {
        for (const auto& n : preset_names()) std::cout << n << "\n";
        return 0;
    }
    if (config_path.empty() && preset.empty()) {
        std::cerr << "error: one of --config or --preset is required\n";
        return kConfigError;
    }

    ExperimentConfig config;
    try {
        std::string text;
        if (!config_path.empty()) {
            std::ifstream in(config_path, std::ios::binary);
            if (!in) {
                std::cerr << "error: cannot read config file '" << config_path << "'\n";
                return kIoError;
            }
            std::ostringstream ss;
            ss << in.rdbuf();
            text = ss.str();
        } else {
            text = preset_text(preset);
        }
        config = parse_config(text);
        if (seed) config.base_seed = *seed;
        if (horizon) config.horizons = {*horizon};
        if (reps) config.reps = *reps;
        if (out_dir) config.outputs.dir = *out_dir;
        validate_config(config);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }

    if (dump) {
        std::cout << to_json(config).dump(2) << "\n";
        return 0;
    }

    ExperimentResult result;
    try {
        result = run_experiment(config);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeError;
    }

    try {
        write_files_atomically(config.outputs.dir, render_outputs(result));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIoError;
    }
    if (!quiet) {
        std::cout << console_summary(result);
        std::cout << "outputs written to " << config.outputs.dir << "\n";
    }
    return 0;
}
