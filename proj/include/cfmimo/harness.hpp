// SPDX-License-Identifier: Apache-2.0
//
// Experiment orchestration: topology, mobility, channel, selection and evaluation per block.

#pragma once

#include "cfmimo/channel.hpp"
#include "cfmimo/config.hpp"
#include "cfmimo/evaluation.hpp"
#include "cfmimo/mobility.hpp"
#include "cfmimo/topology.hpp"

#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfmimo {

/// A failure inside the block loop; the message carries the block index.
class RunError : public std::runtime_error {
public:
    RunError(int block, const std::string& what);
    int block() const noexcept { return block_; }

private:
    int block_;
};

/// Everything shared by the algorithms of one experiment: identical layouts, tracks, shadowing
/// and pilots, so comparisons run on the same realizations.
struct Scenario {
    NetworkTopology topology;
    MobilityTrace trace;
    std::shared_ptr<const PathlossProvider> provider;
    /// M x K shadowing added to every block's path loss (zero when disabled or map-based).
    Matrix shadowing_db;
    std::vector<int> pilots;
    int blocks = 0;

    /// Large-scale snapshot at block b.
    ChannelSnapshot snapshot_at(int b, const RadioConfig& radio) const;
};

/// Builds the scenario. Throws ConfigError for invalid configs and unreadable input files.
Scenario prepare_scenario(const ExperimentConfig& cfg);

struct RunReport {
    Algorithm algorithm = Algorithm::full_cf;
    MetricsReport metrics;
};

/// One algorithm over every block of a prepared scenario. Blocks run on `cfg.workers` threads;
/// the report does not depend on the worker count.
RunReport run_algorithm(const Scenario& scenario, const ExperimentConfig& cfg, Algorithm algorithm);

/// run_algorithm(prepare_scenario(cfg), cfg, cfg.algorithm).
RunReport run_experiment(const ExperimentConfig& cfg);

struct ComparisonRow {
    Algorithm algorithm = Algorithm::full_cf;
    double sum_rate = 0.0;
    double jain = 1.0;
    double mean_serving_size = 0.0;
    double mean_connections = 0.0;
    double pf_objective = 0.0;
    double median_se = 0.0;
};

struct ComparisonReport {
    std::vector<RunReport> runs;
    std::vector<ComparisonRow> table;
};

ComparisonReport compare_algorithms(const ExperimentConfig& cfg, const std::vector<Algorithm>& algorithms);

/// Median of every per-UE-per-block SE value.
double median_se(const MetricsReport& m);

/// results.csv (metadata, per-UE rows, aggregates), blocks.csv (one row per block and UE) and
/// config.txt into `dir`, which is created if needed.
void write_run(const std::filesystem::path& dir, const ExperimentConfig& cfg, const RunReport& run);

/// One sub-directory per algorithm plus comparison.csv.
void write_comparison(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                      const ComparisonReport& report);

struct CdfPoint {
    double value = 0.0;
    double cdf = 0.0;
};

/// Sorted values with ordinates i/n.
std::vector<CdfPoint> empirical_cdf(std::vector<double> values);
/// CDF of every per-UE-per-block SE value.
std::vector<CdfPoint> export_cdf(const MetricsReport& m);
/// Reads blocks.csv from a run directory, writes cdf.csv next to it and returns the table.
std::vector<CdfPoint> export_cdf(const std::filesystem::path& run_dir);

}  // namespace cfmimo
