// SPDX-License-Identifier: Apache-2.0

#include "cfmimo/topology.hpp"

#include "cfmimo/rng.hpp"
#include "text_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <map>

namespace cfmimo {

std::vector<std::vector<int>> NetworkTopology::cluster_members() const
{
    std::vector<std::vector<int>> members(static_cast<std::size_t>(n_clusters));
    for (std::size_t m = 0; m < cluster_of_ap.size(); ++m)
        members[static_cast<std::size_t>(cluster_of_ap[m])].push_back(static_cast<int>(m));
    return members;
}

void NetworkTopology::validate() const
{
    if (!(area.width > 0.0) || !(area.height > 0.0))
        throw InvalidArgument("topology area must have positive width and height");
    if (ap_positions.empty())
        throw InvalidArgument("topology needs at least one AP");
    for (std::size_t m = 0; m < ap_positions.size(); ++m) {
        if (!area.contains(ap_positions[m]))
            throw InvalidArgument(fmt::format("AP {} at ({}, {}) lies outside the area", m,
                                              ap_positions[m].x, ap_positions[m].y));
    }
    if (has_clusters()) {
        if (cluster_of_ap.size() != ap_positions.size())
            throw InvalidArgument("cluster assignment length differs from AP count");
        for (int c : cluster_of_ap) {
            if (c < 0 || c >= n_clusters)
                throw InvalidArgument(fmt::format("cluster index {} outside [0, {})", c, n_clusters));
        }
    }
}

NetworkTopology generate_ppp_topology(const AreaSpec& area, int m, std::uint64_t seed)
{
    if (!(area.width > 0.0) || !(area.height > 0.0))
        throw InvalidArgument("zero-area rectangle");
    if (m < 1)
        throw InvalidArgument("AP count must be at least 1");

    Rng rng(seed);
    std::uniform_real_distribution<double> ux(0.0, area.width);
    std::uniform_real_distribution<double> uy(0.0, area.height);

    NetworkTopology topo;
    topo.area = area;
    topo.ap_positions.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        const double x = ux(rng);
        const double y = uy(rng);
        topo.ap_positions.push_back({x, y});
    }
    return topo;
}

NetworkTopology load_topology(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError(path.string(), 0, "cannot open topology file");

    const std::string file = path.string();
    NetworkTopology topo;
    std::map<long, Point> by_id;
    bool have_header = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::is_blank_or_comment(line))
            continue;
        const auto fields = detail::split_csv(line);
        if (!have_header) {
            if (fields.size() != 2)
                throw ParseError(file, lineno, "expected header 'area_width,area_height'");
            topo.area.width = detail::parse_double(fields[0], file, lineno);
            topo.area.height = detail::parse_double(fields[1], file, lineno);
            if (!(topo.area.width > 0.0) || !(topo.area.height > 0.0))
                throw ParseError(file, lineno, "area dimensions must be positive");
            have_header = true;
            continue;
        }
        if (fields.size() != 3)
            throw ParseError(file, lineno, "expected 'ap_id,x,y'");
        const long id = detail::parse_long(fields[0], file, lineno);
        const Point p{detail::parse_double(fields[1], file, lineno),
                      detail::parse_double(fields[2], file, lineno)};
        if (id < 0)
            throw ParseError(file, lineno, "negative AP id");
        if (!topo.area.contains(p))
            throw ParseError(file, lineno, fmt::format("AP {} at ({}, {}) outside the {} x {} area",
                                                       id, p.x, p.y, topo.area.width,
                                                       topo.area.height));
        if (!by_id.emplace(id, p).second)
            throw ParseError(file, lineno, fmt::format("duplicate AP id {}", id));
    }
    if (!have_header)
        throw ParseError(file, 0, "missing header line");
    if (by_id.empty())
        throw ParseError(file, 0, "no AP rows");

    long expected = 0;
    for (const auto& [id, p] : by_id) {
        if (id != expected)
            throw ParseError(file, 0, fmt::format("AP ids must be contiguous from 0; missing {}", expected));
        topo.ap_positions.push_back(p);
        ++expected;
    }
    return topo;
}

void save_topology(const NetworkTopology& topo, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write topology file " + path.string());
    out << fmt::format("{},{}\n", topo.area.width, topo.area.height);
    for (std::size_t m = 0; m < topo.ap_positions.size(); ++m)
        out << fmt::format("{},{},{}\n", m, topo.ap_positions[m].x, topo.ap_positions[m].y);
}

NetworkTopology build_square_clusters(const NetworkTopology& topo, int n_per_side)
{
    if (n_per_side < 1)
        throw InvalidArgument("n_per_side must be at least 1");

    NetworkTopology out = topo;
    out.n_clusters = n_per_side * n_per_side;
    out.cluster_of_ap.resize(topo.ap_positions.size());

    const double cw = topo.area.width / n_per_side;
    const double ch = topo.area.height / n_per_side;
    for (std::size_t m = 0; m < topo.ap_positions.size(); ++m) {
        const auto& p = topo.ap_positions[m];
        const int cx = std::clamp(static_cast<int>(std::floor(p.x / cw)), 0, n_per_side - 1);
        const int cy = std::clamp(static_cast<int>(std::floor(p.y / ch)), 0, n_per_side - 1);
        out.cluster_of_ap[m] = cy * n_per_side + cx;
    }
    return out;
}

}  // namespace cfmimo
