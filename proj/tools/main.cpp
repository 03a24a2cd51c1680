#include <CLI11.hpp>
#include <string>

#include "coopstab/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Stochastic stability analysis of cooperative ODE systems"};
    app.require_subcommand(1);

    std::string config_path;
    coopstab::CliOverrides overrides;
    std::uint64_t seed = 0;
    std::string out_dir;
    int threads = 0;

    const std::vector<std::string> names = {"equilibria", "simulate",   "stationary",    "sweep",
                                            "quasipotential", "verify", "table1"};
    for (const auto& name : names) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "experiment config (JSON)")->required();
        sub->add_option("--seed", seed, "master seed override");
        sub->add_option("--out", out_dir, "output directory override");
        sub->add_option("--threads", threads, "worker threads (speed only, never results)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : coopstab::kExitConfig;
    }

    auto* sub = app.get_subcommands().front();
    if (sub->count("--seed")) overrides.seed = seed;
    if (sub->count("--out")) overrides.out = out_dir;
    if (sub->count("--threads")) overrides.threads = threads;
    return coopstab::run_cli(sub->get_name(), config_path, overrides);
}
