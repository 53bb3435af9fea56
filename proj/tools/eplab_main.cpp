// eplab: steady subsonic Euler-Poisson nozzle-flow laboratory.
//
// Subcommands: background, solve-potential, solve-stream, audit-convexity,
// uniqueness-test, coercivity-probe. Each reads a key=value config, writes
// CSV artifacts plus a manifest into --out, and exits with a code that
// identifies the error family (see README).

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "eplab/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"steady subsonic Euler-Poisson nozzle-flow laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    std::string outdir = "out";
    std::optional<std::uint64_t> seed_override;

    const std::vector<std::string> subs = {"background",      "solve-potential",
                                           "solve-stream",    "audit-convexity",
                                           "uniqueness-test", "coercivity-probe"};
    for (const auto& name : subs) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "key=value run description");
        sub->add_option("--out", outdir, "output directory (default: out)");
        sub->add_option("--seed", seed_override, "seed override (u64)");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        eplab::RunConfig cfg;
        if (!config_path.empty()) cfg = eplab::parse_config(config_path);
        if (seed_override) cfg.seed = *seed_override;
        const std::string sub = app.get_subcommands().front()->get_name();
        return eplab::run_subcommand(sub, cfg, outdir);
    } catch (const std::exception& e) {
        std::cerr << "eplab: error: " << e.what() << "\n";
        return eplab::exit_code_for(e);
    }
}
