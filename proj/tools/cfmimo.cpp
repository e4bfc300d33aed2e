// SPDX-License-Identifier: Apache-2.0
//
// cfmimo simulate | compare | export-cdf
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include "cfmimo/harness.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <optional>

namespace {

constexpr int exit_config = 2;
constexpr int exit_runtime = 3;

cfmimo::ExperimentConfig load(const std::string& path, const std::optional<std::uint64_t>& seed,
                              const std::optional<std::string>& out, const std::optional<int>& workers)
{
    auto cfg = cfmimo::load_config(path);
    if (seed)
        cfg.seed = *seed;
    if (out)
        cfg.output_dir = *out;
    if (workers)
        cfg.workers = *workers;
    cfg.validate();
    return cfg;
}

std::vector<cfmimo::Algorithm> parse_list(const std::vector<std::string>& names)
{
    std::vector<cfmimo::Algorithm> out;
    for (const auto& n : names) {
        const auto a = cfmimo::parse_algorithm(n);
        if (!a)
            throw cfmimo::ConfigError(fmt::format("unknown algorithm '{}'", n));
        out.push_back(*a);
    }
    return out;
}

void print_summary(const cfmimo::RunReport& r)
{
    const auto& m = r.metrics;
    fmt::print("{:<12} sum_rate={:.4g} bit/s  jain={:.3f}  mean_G={:.2f}  median_se={:.3f}  violations={}\n",
               cfmimo::to_string(r.algorithm), m.sum_rate, m.jain, m.mean_serving_size, cfmimo::median_se(m),
               m.blocks_with_violations);
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Cell-free massive MIMO AP-selection simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<int> workers;
    std::vector<std::string> algorithms;
    std::string run_dir;

    auto* simulate = app.add_subcommand("simulate", "Run the configured algorithm");
    simulate->add_option("--config", config_path, "Experiment config file")->required();
    simulate->add_option("--seed", seed, "Master seed override");
    simulate->add_option("--out", out_dir, "Output directory override");
    simulate->add_option("--workers", workers, "Worker threads (0 = all cores)");

    auto* compare = app.add_subcommand("compare", "Run several algorithms on shared realizations");
    compare->add_option("--config", config_path, "Experiment config file")->required();
    compare->add_option("--algorithms", algorithms, "Comma-separated algorithm names")
        ->required()
        ->delimiter(',');
    compare->add_option("--seed", seed, "Master seed override");
    compare->add_option("--out", out_dir, "Output directory override");
    compare->add_option("--workers", workers, "Worker threads (0 = all cores)");

    auto* cdf = app.add_subcommand("export-cdf", "Write cdf.csv for a finished run");
    cdf->add_option("--run", run_dir, "Run directory containing blocks.csv")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_config;
    }

    cfmimo::ExperimentConfig cfg;
    try {
        if (*simulate || *compare)
            cfg = load(config_path, seed, out_dir, workers);
        if (*compare)
            (void)parse_list(algorithms);
    } catch (const std::exception& e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return exit_config;
    }

    try {
        if (*simulate) {
            const auto run = cfmimo::run_experiment(cfg);
            cfmimo::write_run(cfg.output_dir, cfg, run);
            print_summary(run);
            fmt::print("results written to {}\n", cfg.output_dir);
        } else if (*compare) {
            const auto report = cfmimo::compare_algorithms(cfg, parse_list(algorithms));
            cfmimo::write_comparison(cfg.output_dir, cfg, report);
            for (const auto& r : report.runs)
                print_summary(r);
            fmt::print("results written to {}\n", cfg.output_dir);
        } else {
            const auto table = cfmimo::export_cdf(run_dir);
            fmt::print("{} points written to {}/cdf.csv\n", table.size(), run_dir);
        }
    } catch (const cfmimo::ConfigError& e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return exit_config;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return exit_runtime;
    }
    return 0;
}
