// SPDX-License-Identifier: Apache-2.0

#include "cfmimo/mobility.hpp"

#include "cfmimo/rng.hpp"
#include "text_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>

namespace cfmimo {

std::vector<Point> MobilityTrace::at_block(std::size_t b) const
{
    std::vector<Point> out;
    out.reserve(positions.size());
    for (const auto& track : positions)
        out.push_back(track.at(b));
    return out;
}

namespace {

// Folds an unbounded coordinate back into [0, len]; odd fold count flips the direction.
double fold(double p, double len, double& dir)
{
    const double n = std::floor(p / len);
    const double q = p - n * len;
    if (static_cast<long long>(n) % 2 != 0) {
        dir = -dir;
        return len - q;
    }
    return q;
}

class RwpWalker {
public:
    RwpWalker(const AreaSpec& area, const RwpParams& params, Rng& rng)
        : area_(area), params_(params), rng_(rng),
          rayleigh_sigma_(params.mean_transition / std::sqrt(std::numbers::pi / 2.0))
    {
        std::uniform_real_distribution<double> ux(0.0, area.width);
        std::uniform_real_distribution<double> uy(0.0, area.height);
        pos_ = {ux(rng_), uy(rng_)};
        new_leg();
    }

    Point position() const { return pos_; }

    void advance(double dist)
    {
        while (dist > 0.0) {
            const double step = std::min(dist, remaining_);
            move(step);
            dist -= step;
            remaining_ -= step;
            if (remaining_ <= 0.0)
                new_leg();
        }
    }

private:
    double draw_length()
    {
        // Inverse-CDF Rayleigh draw.
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const double v = u(rng_);
        return rayleigh_sigma_ * std::sqrt(-2.0 * std::log1p(-v));
    }

    void new_leg()
    {
        std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
        if (params_.boundary == MobilityBoundary::reflect) {
            const double a = angle(rng_);
            dx_ = std::cos(a);
            dy_ = std::sin(a);
            remaining_ = draw_length();
            return;
        }
        for (int attempt = 0; attempt < 1000; ++attempt) {
            const double a = angle(rng_);
            const double len = draw_length();
            const Point end{pos_.x + len * std::cos(a), pos_.y + len * std::sin(a)};
            if (area_.contains(end, 0.0)) {
                dx_ = std::cos(a);
                dy_ = std::sin(a);
                remaining_ = len;
                return;
            }
        }
        // Pathological corner case (mean leg far larger than the area): head for a uniform point.
        std::uniform_real_distribution<double> ux(0.0, area_.width);
        std::uniform_real_distribution<double> uy(0.0, area_.height);
        const Point target{ux(rng_), uy(rng_)};
        const double len = distance(pos_, target);
        dx_ = len > 0.0 ? (target.x - pos_.x) / len : 1.0;
        dy_ = len > 0.0 ? (target.y - pos_.y) / len : 0.0;
        remaining_ = std::max(len, 1e-9);
    }

    void move(double step)
    {
        pos_.x = fold(pos_.x + step * dx_, area_.width, dx_);
        pos_.y = fold(pos_.y + step * dy_, area_.height, dy_);
    }

    const AreaSpec& area_;
    const RwpParams& params_;
    Rng& rng_;
    double rayleigh_sigma_;
    Point pos_;
    double dx_ = 1.0;
    double dy_ = 0.0;
    double remaining_ = 0.0;
};

}  // namespace

MobilityTrace generate_rwp(const AreaSpec& area, const RwpParams& params, std::uint64_t seed)
{
    if (!(area.width > 0.0) || !(area.height > 0.0))
        throw InvalidArgument("zero-area rectangle");
    if (params.ue_count < 1)
        throw InvalidArgument("UE count must be at least 1");
    if (!(params.speed > 0.0))
        throw InvalidArgument("speed must be positive");
    if (!(params.block_duration > 0.0) || params.duration < params.block_duration)
        throw InvalidArgument("duration must be at least one block");
    if (!(params.mean_transition > 0.0))
        throw InvalidArgument("mean transition length must be positive");

    const auto blocks = static_cast<std::size_t>(std::floor(params.duration / params.block_duration + 1e-9));
    const double step = params.speed * params.block_duration;

    MobilityTrace trace;
    trace.block_duration = params.block_duration;
    trace.positions.resize(static_cast<std::size_t>(params.ue_count));
    trace.speed.assign(static_cast<std::size_t>(params.ue_count), params.speed);

    for (int k = 0; k < params.ue_count; ++k) {
        Rng rng(derive_seed(seed, Stream::mobility, static_cast<std::uint64_t>(k)));
        RwpWalker walker(area, params, rng);
        auto& track = trace.positions[static_cast<std::size_t>(k)];
        track.reserve(blocks);
        track.push_back(walker.position());
        for (std::size_t b = 1; b < blocks; ++b) {
            walker.advance(step);
            track.push_back(walker.position());
        }
    }
    return trace;
}

namespace {

struct Sample {
    double t;
    Point p;
};

Point interpolate(const std::vector<Sample>& s, double t, double snap)
{
    // Callers guarantee s.front().t <= t <= s.back().t.
    auto hi = std::lower_bound(s.begin(), s.end(), t, [](const Sample& a, double v) { return a.t < v; });
    if (hi == s.end())
        return s.back().p;
    if (hi->t == t || hi == s.begin())
        return hi->p;
    const auto lo = hi - 1;
    if (t - lo->t <= snap)
        return lo->p;
    if (hi->t - t <= snap)
        return hi->p;
    const double w = (t - lo->t) / (hi->t - lo->t);
    return {lo->p.x + w * (hi->p.x - lo->p.x), lo->p.y + w * (hi->p.y - lo->p.y)};
}

}  // namespace

MobilityTrace load_tracks(const std::filesystem::path& path, double block_duration,
                          const AreaSpec& area)
{
    if (!(block_duration > 0.0))
        throw InvalidArgument("block duration must be positive");

    std::ifstream in(path);
    const std::string file = path.string();
    if (!in)
        throw ParseError(file, 0, "cannot open track file");

    std::map<long, std::vector<Sample>> tracks;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::is_blank_or_comment(line))
            continue;
        const auto f = detail::split_csv(line);
        if (tracks.empty() && !f.empty() && f[0] == "ue_id")
            continue;   // optional header
        if (f.size() != 4)
            throw ParseError(file, lineno, "expected 'ue_id,t_seconds,x,y'");
        const long ue = detail::parse_long(f[0], file, lineno);
        const double t = detail::parse_double(f[1], file, lineno);
        const Point p{detail::parse_double(f[2], file, lineno), detail::parse_double(f[3], file, lineno)};
        if (ue < 0)
            throw ParseError(file, lineno, "negative UE id");
        if (!area.contains(p))
            throw ParseError(file, lineno, fmt::format("UE {} at ({}, {}) outside the area", ue, p.x, p.y));
        auto& s = tracks[ue];
        if (!s.empty()) {
            if (t <= s.back().t)
                throw ParseError(file, lineno, fmt::format("timestamps of UE {} not strictly increasing", ue));
            if (t - s.back().t > 10.0 * block_duration + 1e-12)
                throw ParseError(file, lineno,
                                 fmt::format("gap of {} s in UE {} exceeds 10 blocks", t - s.back().t, ue));
        }
        s.push_back({t, p});
    }
    if (tracks.empty())
        throw ParseError(file, 0, "no track samples");

    long expected = 0;
    double start = -std::numeric_limits<double>::infinity();
    double stop = std::numeric_limits<double>::infinity();
    for (const auto& [ue, s] : tracks) {
        if (ue != expected)
            throw ParseError(file, 0, fmt::format("UE ids must be contiguous from 0; missing {}", expected));
        ++expected;
        start = std::max(start, s.front().t);
        stop = std::min(stop, s.back().t);
    }
    if (stop < start)
        throw ParseError(file, 0, "UE tracks do not share a common time window");

    const auto blocks = static_cast<std::size_t>(std::floor((stop - start) / block_duration + 1e-9)) + 1;

    MobilityTrace trace;
    trace.block_duration = block_duration;
    for (const auto& [ue, s] : tracks) {
        std::vector<Point> grid;
        grid.reserve(blocks);
        for (std::size_t b = 0; b < blocks; ++b)
            grid.push_back(interpolate(s, std::min(start + static_cast<double>(b) * block_duration, stop),
                                       1e-9 * block_duration));
        trace.positions.push_back(std::move(grid));

        std::vector<double> rates;
        for (std::size_t i = 1; i < s.size(); ++i)
            rates.push_back(distance(s[i].p, s[i - 1].p) / (s[i].t - s[i - 1].t));
        double v = 0.0;
        if (!rates.empty()) {
            const auto mid = rates.begin() + static_cast<std::ptrdiff_t>(rates.size() / 2);
            std::nth_element(rates.begin(), mid, rates.end());
            v = *mid;
            if (rates.size() % 2 == 0) {
                const double lower = *std::max_element(rates.begin(), mid);
                v = 0.5 * (v + lower);
            }
        }
        trace.speed.push_back(v);
    }
    return trace;
}

}  // namespace cfmimo
