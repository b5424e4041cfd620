// Command-line front end: sgdlab check|run|table|xi|kl|plot --config FILE [options]

#include <iostream>

#include "CLI11.hpp"
#include "sgdlab/experiments.hpp"

int main(int argc, char** argv) {
    using namespace sgdlab;

    CLI::App app{"SGD laboratory: noise oracles, assumption checks and limit diagnostics"};
    app.require_subcommand(1);

    CommandOptions opt;
    std::uint64_t seed = 0;
    std::string out, channel;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config, "TOML experiment config")->required();
        sub->add_option("--seed", seed, "master seed (overrides run.seed)");
        sub->add_option("--out", out, "output directory (overrides run.out)");
        sub->add_option("--channel", channel, "moment-bound channel")->check(CLI::IsMember({"derived", "paper"}));
        sub->add_flag("--force", opt.force, "run even when assumption checks fail");
    };

    auto* check = app.add_subcommand("check", "validate the step and moment-bound sequences");
    common(check);

    auto* run = app.add_subcommand("run", "simulate one seeded trajectory");
    common(run);
    run->add_option("--x0", opt.x0, "starting point (default: first configured x0)");
    run->add_option("--level", opt.level, "noise level b or sigma (default: first configured level)");
    run->add_option("--id", opt.run_id, "run id (default run_<seed>)");
    bool no_plot = false;
    run->add_flag("--no-plot", no_plot, "skip the SVG plot");

    auto* table = app.add_subcommand("table", "outcome table over the x0 x level grid");
    common(table);

    auto* xi = app.add_subcommand("xi", "probe the descent event along a stored run");
    common(xi);
    xi->add_option("--id", opt.run_id, "run id (default run_<seed>)");
    xi->add_option("--probes", opt.probes, "iterations: a:b, a:b:step or k1,k2,...")->capture_default_str();

    auto* kl = app.add_subcommand("kl", "fit the local Lojasiewicz exponent at a catalog component");
    common(kl);
    kl->add_option("--component", opt.component, "catalog index or kind label")->required();
    kl->add_option("--radius", opt.radius, "sampling radius")->capture_default_str();
    kl->add_option("--samples", opt.samples, "number of samples")->capture_default_str();
    std::string side = "both";
    kl->add_option("--side", side, "sample side")->check(CLI::IsMember({"both", "lower", "upper"}))->capture_default_str();

    auto* plot = app.add_subcommand("plot", "render a stored run as SVG");
    common(plot);
    plot->add_option("--id", opt.run_id, "run id (default run_<seed>)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_config_error;
    }

    if (app.get_subcommands().front()->count("--seed")) opt.seed = seed;
    if (!out.empty()) opt.out = out;
    if (!channel.empty()) opt.channel = parse_bounds_channel(channel);
    opt.plot = !no_plot;
    opt.side = side == "lower" ? SampleSide::lower : side == "upper" ? SampleSide::upper : SampleSide::both;

    if (*check) return cmd_check(opt, std::cout, std::cerr);
    if (*run) return cmd_run(opt, std::cout, std::cerr);
    if (*table) return cmd_table(opt, std::cout, std::cerr);
    if (*xi) return cmd_xi(opt, std::cout, std::cerr);
    if (*kl) return cmd_kl(opt, std::cout, std::cerr);
    return cmd_plot(opt, std::cout, std::cerr);
}
