// SPDX-License-Identifier: Apache-2.0
//
// Per-UE positions at communication-block boundaries.

#pragma once

#include "cfmimo/types.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace cfmimo {

struct MobilityTrace {
    double block_duration = 0.02;
    /// positions[k][b]: UE k at the start of block b.
    std::vector<std::vector<Point>> positions;
    /// Speed of each UE in m/s.
    std::vector<double> speed;

    std::size_t ue_count() const { return positions.size(); }
    std::size_t block_count() const { return positions.empty() ? 0 : positions.front().size(); }

    /// Positions of every UE at block b.
    std::vector<Point> at_block(std::size_t b) const;
};

enum class MobilityBoundary {
    /// A leg whose end point falls outside the area is redrawn.
    resample,
    /// Specular reflection at the walls.
    reflect,
};

struct RwpParams {
    int ue_count = 20;
    double speed = 0.8;
    double duration = 1.0;
    double block_duration = 0.02;
    /// Mean of the Rayleigh-distributed leg length.
    double mean_transition = 50.0;
    MobilityBoundary boundary = MobilityBoundary::resample;
};

/// Random-waypoint traces with zero pause: uniform start, direction uniform on [0, 2pi),
/// Rayleigh leg lengths, constant speed. T = floor(duration / block_duration) samples.
MobilityTrace generate_rwp(const AreaSpec& area, const RwpParams& params, std::uint64_t seed);

/// Reads `ue_id,t_seconds,x,y` samples and resamples them by linear interpolation onto a
/// common block grid spanning [latest first sample, earliest last sample]. Speed is the median
/// displacement rate between raw samples.
MobilityTrace load_tracks(const std::filesystem::path& path, double block_duration,
                          const AreaSpec& area);

}  // namespace cfmimo
