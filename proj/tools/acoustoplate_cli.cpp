// Command-line front-end: acoustoplate run <config> | sweep <config>.

#include "acoustoplate/cli.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace ap = acoustoplate;

int main(int argc, char** argv) {
    CLI::App app{"Coupled acoustic chamber / thermoelastic beam experiments"};
    app.set_version_flag("--version", ap::version_string);
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    int threads = 1;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (default: out/<experiment>)");
        sub->add_option("--threads", threads, "parallel runs; 0 uses every core")->check(CLI::NonNegativeNumber);
        sub->add_option("--seed", seed, "overrides the seed of the config");
    };
    auto* run = app.add_subcommand("run", "run the experiment named in the config");
    auto* sweep = app.add_subcommand("sweep", "run the sweep block of the config over its (gamma, kappa) grid");
    add_common(run);
    add_common(sweep);

    CLI11_PARSE(app, argc, argv);

    try {
        ap::cli::RunConfig cfg = ap::cli::load_config(config_path);
        ap::cli::Overrides ov;
        for (auto* sub : {run, sweep}) {
            if (!sub->parsed()) continue;
            if (sub->count("--seed")) ov.seed = seed;
            if (sub->count("--threads")) ov.threads = threads;
        }
        cfg = ap::cli::apply(cfg, ov);
        if (sweep->parsed()) {
            if (cfg.experiment != "sweep" && cfg.sweep.cells.empty())
                throw ap::ConfigError("config has no sweep block with (gamma, kappa) cells");
            cfg.experiment = "sweep";
        }
        if (out_dir.empty()) out_dir = "out/" + cfg.experiment;
        const auto outcome = ap::cli::run_config(cfg, out_dir);
        std::cout << outcome.summary.dump(2) << "\n";
        if (!outcome.ok()) {
            std::cerr << "error: " << outcome.error << "\n";
            return 1;
        }
        return 0;
    } catch (const ap::AssumptionError& e) {
        std::cerr << "assumption violation: " << e.what() << "\n";
        return 3;
    } catch (const ap::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
