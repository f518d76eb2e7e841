// Command-line front end: train/evaluate the framework matrix, compute the
// random-walk reference, and aggregate per-run summaries into a report.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qmarl/config.hpp"
#include "qmarl/experiment.hpp"
#include "qmarl/metrics.hpp"
#include "qmarl/textio.hpp"

namespace {

struct CliArgs {
    std::string config_path;
    std::string out_dir;
    std::string framework;
    int seed = -1;
};

void add_common_options(CLI::App* cmd, CliArgs& args) {
    cmd->add_option("--config", args.config_path, "Path to the experiment config file");
    cmd->add_option("--seed", args.seed, "Run only this seed (overrides run.seeds)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--out", args.out_dir, "Output directory (overrides run.out_dir)");
    cmd->add_option("--framework", args.framework,
                    "Framework: proposed, comp1, comp2, comp3, or random (overrides run.framework)");
}

qmarl::ExperimentConfig build_config(const CliArgs& args) {
    qmarl::ExperimentConfig config;
    if (!args.config_path.empty()) config = qmarl::load_config(args.config_path);
    if (!args.out_dir.empty()) config.run.out_dir = args.out_dir;
    if (!args.framework.empty()) {
        try {
            config.run.framework = qmarl::parse_framework(args.framework);
        } catch (const std::invalid_argument& e) {
            throw qmarl::ConfigError(e.what());
        }
    }
    if (args.seed >= 0) config.run.seeds = {static_cast<std::uint64_t>(args.seed)};
    config.validate();
    return config;
}

int cmd_train(const qmarl::ExperimentConfig& config) {
    for (std::uint64_t seed : config.run.seeds) {
        const qmarl::Summary summary = qmarl::run_training(config, seed, &std::cout);
        std::cout << qmarl::run_dir_name(config.run.framework, seed) << " done";
        if (summary.has("achievability"))
            std::cout << ", achievability " << summary.get("achievability");
        else if (summary.has("eval_achievability"))
            std::cout << ", achievability " << summary.get("eval_achievability");
        std::cout << '\n';
    }
    return 0;
}

int cmd_evaluate(const qmarl::ExperimentConfig& config) {
    for (std::uint64_t seed : config.run.seeds) {
        const qmarl::Summary summary = qmarl::evaluate_run(config, seed);
        std::cout << qmarl::run_dir_name(config.run.framework, seed) << " eval_return "
                  << summary.get("eval_return") << '\n';
    }
    return 0;
}

int cmd_random_baseline(const qmarl::ExperimentConfig& config) {
    const qmarl::RandomReference ref = qmarl::run_random_baseline(config);
    std::cout << "random_walk_return " << qmarl::textio::fmt(ref.mean_return) << " ("
              << ref.episodes << " episodes, seed " << ref.seed << ")\n";
    return 0;
}

int cmd_report(const qmarl::ExperimentConfig& config) {
    const qmarl::Summary report = qmarl::write_report(config);
    for (const auto& [key, value] : report.entries) std::cout << key << ' ' << value << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum multi-agent reinforcement-learning offloading benchmark"};
    app.require_subcommand(1);

    CliArgs args;
    CLI::App* train = app.add_subcommand("train", "Train the configured framework over the seed list");
    CLI::App* evaluate = app.add_subcommand("evaluate", "Greedy-evaluate saved models of finished runs");
    CLI::App* random_baseline =
        app.add_subcommand("random-baseline", "Compute the random-walk reference return");
    CLI::App* report = app.add_subcommand("report", "Aggregate run summaries into a report");
    for (CLI::App* cmd : {train, evaluate, random_baseline, report}) add_common_options(cmd, args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const qmarl::ExperimentConfig config = build_config(args);
        if (train->parsed()) return cmd_train(config);
        if (evaluate->parsed()) return cmd_evaluate(config);
        if (random_baseline->parsed()) return cmd_random_baseline(config);
        return cmd_report(config);
    } catch (const qmarl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
