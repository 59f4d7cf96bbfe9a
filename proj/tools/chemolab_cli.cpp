// chemolab: run, sweep and summarize chemotaxis experiments.
//
//   chemolab run <config.ini>     [--out DIR] [--seed S]
//   chemolab sweep <sweep.ini>    [--out DIR] [--seed S] [--workers N]
//   chemolab report <results dir> [--out DIR]
//
// Exit codes: 0 all checks pass, 2 a check failed, 3 solver diverged, 4 config error.

#include <CLI11.hpp>

#include <iostream>

#include "chemolab/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Chemotaxis system laboratory"};
    app.require_subcommand(1);

    std::string out;
    std::uint64_t seed = 0;
    int workers = 0;
    std::string target;

    auto* run = app.add_subcommand("run", "Integrate one experiment and evaluate its checks");
    run->add_option("config", target, "Experiment config file")->required();
    run->add_option("--out", out, "Output directory (overrides the config)");
    run->add_option("--seed", seed, "Seed override for stochastic initial data");

    auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep concurrently");
    sweep->add_option("config", target, "Sweep config file")->required();
    sweep->add_option("--out", out, "Output directory (overrides the config)");
    sweep->add_option("--seed", seed, "Seed override for every point");
    sweep->add_option("--workers", workers, "Worker threads (0 = available parallelism)");

    auto* report = app.add_subcommand("report", "Summarize a run or sweep directory");
    report->add_option("dir", target, "Results directory")->required();
    report->add_option("--out", out, "Where to write plot_data.csv and summary.txt");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : chemolab::kExitConfigError;
    }

    chemolab::CommandOptions opts;
    if (!out.empty()) opts.out = out;
    if (app.got_subcommand(run) || app.got_subcommand(sweep)) {
        auto* sub = app.got_subcommand(run) ? run : sweep;
        if (sub->count("--seed")) opts.seed = seed;
    }
    if (sweep->count("--workers")) opts.workers = workers;

    try {
        if (*run) return chemolab::run_command(target, opts, std::cerr);
        if (*sweep) return chemolab::sweep_command(target, opts, std::cerr);
        return chemolab::report_command(target, opts, std::cout, std::cerr);
    } catch (const chemolab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return chemolab::kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return chemolab::kExitConfigError;
    }
}
