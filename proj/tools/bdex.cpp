// Command-line front end: bdex <experiment> --config FILE [--set k=v ...] [--out DIR]

#include "bdex/config.hpp"
#include "bdex/experiments.hpp"
#include "bdex/pde.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Boundary-driven exclusion process experiments"};
    app.require_subcommand(1, 1);
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    for (const auto& name : bdex::experiment_names()) {
        auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", config_path, "JSON configuration file")->required();
        sub->add_option("--set", overrides, "override a configuration entry, key=value (dotted keys)");
        sub->add_option("--out", out_dir, "output directory (defaults to the configured one)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    const std::string experiment = app.get_subcommands().front()->get_name();

    bdex::ExperimentConfig config;
    try {
        config = bdex::apply_overrides(bdex::load_config(config_path), overrides);
        if (config.experiment != experiment)
            config = bdex::apply_overrides(config, {"experiment=\"" + experiment + "\""});
        if (!out_dir.empty()) config.output = out_dir;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }

    try {
        const auto result = bdex::run_experiment(config);
        bdex::emit_report(config, result, config.output);
        for (const auto& c : result.checks)
            std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " value=" << c.value << " threshold=" << c.threshold
                      << '\n';
        return result.all_passed() ? 0 : 3;
    } catch (const bdex::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    }
}
