// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration. The file format is one `key = value` per line with dotted section
// names; `#` starts a comment line. See README.md for the full key list.

#pragma once

#include "cfmimo/channel.hpp"
#include "cfmimo/evaluation.hpp"
#include "cfmimo/mdp.hpp"
#include "cfmimo/mobility.hpp"
#include "cfmimo/selection.hpp"
#include "cfmimo/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace cfmimo {

enum class TopologySource { ppp, file };
enum class MobilitySource { rwp, file };
enum class ChannelProvider { log_distance, map };

struct ExperimentConfig {
    std::uint64_t seed = 1;
    int blocks = 50;
    /// 0 picks the hardware concurrency.
    int workers = 0;
    std::string output_dir = "results";

    TopologySource topology_source = TopologySource::ppp;
    std::string topology_file;
    int ap_count = 100;
    AreaSpec area;
    /// Square CPU clusters per side for CUC; 0 disables clustering.
    int clusters_per_side = 0;

    MobilitySource mobility_source = MobilitySource::rwp;
    std::string tracks_file;
    int ue_count = 20;
    double speed = 0.8;
    double mean_transition = 50.0;
    MobilityBoundary boundary = MobilityBoundary::resample;

    ChannelProvider channel_provider = ChannelProvider::log_distance;
    std::string pathloss_map_file;
    /// Log-normal shadowing on the log-distance provider, fixed per link for the run.
    bool shadowing = true;
    bool sequential_pilots = false;
    RadioConfig radio;

    Algorithm algorithm = Algorithm::full_cf;
    SelectionConstraints constraints;
    MdpConfig mdp;

    EvaluationConfig evaluation;

    /// Throws ConfigError for out-of-range values or missing referenced files.
    void validate() const;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Relative file paths are resolved against `base_dir`. Throws ConfigError on unknown keys,
/// malformed values or duplicate keys. The result is not validated.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Every key, in a fixed order, with shortest round-trip number formatting.
std::string serialize_config(const ExperimentConfig& cfg);

/// FNV-1a over the serialized config, leaving out `workers` and `output_dir` which do not change
/// results.
std::uint64_t config_hash(const ExperimentConfig& cfg);

}  // namespace cfmimo
