// SPDX-License-Identifier: Apache-2.0
//
// Static network layout: AP positions inside a rectangular area, optional obstacle polygons
// (carried for export only) and the square CPU-cluster grid used by clustered selection.

#pragma once

#include "cfmimo/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace cfmimo {

struct NetworkTopology {
    AreaSpec area;
    std::vector<Point> ap_positions;
    /// Empty until build_square_clusters() is applied.
    std::vector<int> cluster_of_ap;
    int n_clusters = 0;
    std::vector<std::vector<Point>> obstacles;

    std::size_t ap_count() const { return ap_positions.size(); }
    bool has_clusters() const { return !cluster_of_ap.empty(); }

    /// APs grouped by cluster index, ascending AP id inside each cluster.
    std::vector<std::vector<int>> cluster_members() const;

    /// Throws InvalidArgument when an invariant is broken.
    void validate() const;
};

/// M points drawn independently and uniformly over the area (PPP conditioned on M).
NetworkTopology generate_ppp_topology(const AreaSpec& area, int m, std::uint64_t seed);

NetworkTopology load_topology(const std::filesystem::path& path);
void save_topology(const NetworkTopology& topo, const std::filesystem::path& path);

/// Equal axis-aligned square grid of n_per_side x n_per_side cells; an AP goes to the cell of
/// its floor-divided coordinates (the far edges fold into the last cell).
NetworkTopology build_square_clusters(const NetworkTopology& topo, int n_per_side);

}  // namespace cfmimo
