#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fracreg/cli.hpp"

int main(int argc, char** argv) {
    using namespace fracreg::cli;

    CLI::App app{"Fractional-order control: simulate, design and pole analysis"};
    app.require_subcommand(1);

    CommandOptions opts;
    std::string out_dir;
    auto add = [&](const char* name, const char* help) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", opts.config, "Run configuration (JSON)")->required();
        sub->add_option("--out", out_dir, "Output directory (overrides output.dir)");
        return sub;
    };
    auto* simulate = add("simulate", "Simulate the closed loop, write a trajectory CSV");
    auto* design = add("design", "Place poles, write a design report JSON");
    auto* poles = add("poles", "Locate closed-loop poles, write a roots JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }
    if (!out_dir.empty()) {
        opts.out_dir = out_dir;
    }
    if (simulate->parsed()) {
        return cmd_simulate(opts, std::cerr);
    }
    if (design->parsed()) {
        return cmd_design(opts, std::cerr);
    }
    if (poles->parsed()) {
        return cmd_poles(opts, std::cerr);
    }
    return kConfigError;
}
