#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "levystop/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Optimal stopping under Levy dynamics: penalized PIDE solver with diagnostics"};
    app.require_subcommand(1);

    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    int refine = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "configuration file (key = value text or JSON)");
        sub->add_option("--out", out, "output directory, overrides output.dir");
        sub->add_option("--seed", seed, "oracle seed, overrides oracle.seed");
        sub->add_option("--refine", refine, "halve h and dt k times; k > 0 adds a convergence table")
            ->check(CLI::Range(0, 6));
    };
    CLI::App* solve = app.add_subcommand("solve", "solve and write the value surface, boundary and diagnostics");
    CLI::App* compare = app.add_subcommand("compare", "solve, then compare against Monte Carlo and closed forms");
    app.add_subcommand("selftest", "fast structural checks of every module");
    add_common(solve);
    add_common(compare);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const CLI::App* sub = app.get_subcommands().front();
    levystop::CommandOptions opt;
    opt.config_path = config;
    opt.refine = refine;
    if (sub != app.get_subcommand("selftest")) {
        if (sub->count("--out") > 0) opt.out_dir = out;
        if (sub->count("--seed") > 0) opt.seed = seed;
    }
    return levystop::run_command(sub->get_name(), opt, std::cout, std::cerr);
}
