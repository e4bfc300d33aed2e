// SPDX-License-Identifier: Apache-2.0

#include "cfmimo/channel.hpp"

#include "text_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>

namespace cfmimo {

void RadioConfig::validate() const
{
    if (!(carrier_freq > 0) || !(bandwidth > 0) || !(slot_duration > 0) || !(tx_power_per_link > 0) ||
        !(ap_height > 0) || !(ue_height > 0) || !(d0 > 0) || !(dc > 0) || !(near_field_clamp > 0))
        throw InvalidArgument("radio parameters must be positive");
    if (shadowing_sigma < 0)
        throw InvalidArgument("shadowing sigma must be non-negative");
    if (pilot_len_slots < 1 || block_len_slots <= pilot_len_slots)
        throw InvalidArgument("need 1 <= tau_p < tau_c");
    if (d0 > dc)
        throw InvalidArgument("d0 must not exceed dc");
}

double hata_intercept(const RadioConfig& cfg)
{
    const double lf = std::log10(cfg.carrier_freq / 1e6);
    return 46.3 + 33.9 * lf - 13.82 * std::log10(cfg.ap_height) - (1.1 * lf - 0.7) * cfg.ue_height +
           (1.56 * lf - 0.8);
}

double pathloss_three_slope(double d, const RadioConfig& cfg)
{
    const double scale = cfg.distance_unit == DistanceUnit::kilometres ? 1e-3 : 1.0;
    const double dist = std::max(d, cfg.near_field_clamp) * scale;
    const double d0 = cfg.d0 * scale;
    const double dc = cfg.dc * scale;
    const double l0 = hata_intercept(cfg);
    if (dist > dc)
        return l0 + 35.0 * std::log10(dist);
    if (dist <= d0)
        return l0 + 15.0 * std::log10(dc) + 20.0 * std::log10(d0);
    return l0 + 15.0 * std::log10(dc) + 20.0 * std::log10(dist);
}

Matrix apply_shadowing(const Matrix& pathloss_db, double sigma, std::uint64_t seed)
{
    if (sigma < 0)
        throw InvalidArgument("shadowing sigma must be non-negative");
    if (sigma == 0.0)
        return pathloss_db;
    Rng rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    Matrix out = pathloss_db;
    for (Eigen::Index m = 0; m < out.rows(); ++m)
        for (Eigen::Index k = 0; k < out.cols(); ++k)
            out(m, k) += sigma * z(rng);
    return out;
}

double noise_power(const RadioConfig& cfg)
{
    return boltzmann * reference_temperature * cfg.bandwidth * std::pow(10.0, cfg.noise_figure / 10.0);
}

double LogDistanceProvider::pathloss_db(int, const Point& ap_pos, const Point& ue) const
{
    return pathloss_three_slope(distance(ap_pos, ue), cfg_);
}

// --- path-loss map ---------------------------------------------------------------------------

PathlossMap::PathlossMap(double grid_dx, double grid_dy, Point origin, int ap_count)
    : dx_(grid_dx), dy_(grid_dy), origin_(origin), cells_(static_cast<std::size_t>(ap_count))
{
    if (!(grid_dx > 0) || !(grid_dy > 0))
        throw InvalidArgument("grid spacing must be positive");
    if (ap_count < 1)
        throw InvalidArgument("path-loss map needs at least one AP");
}

std::pair<long, long> PathlossMap::cell_of(const Point& p) const
{
    return {static_cast<long>(std::floor((p.x - origin_.x) / dx_ + 0.5)),
            static_cast<long>(std::floor((p.y - origin_.y) / dy_ + 0.5))};
}

Point PathlossMap::cell_center(long ix, long iy) const
{
    return {origin_.x + static_cast<double>(ix) * dx_, origin_.y + static_cast<double>(iy) * dy_};
}

double PathlossMap::pathloss_db(int ap, const Point&, const Point& ue) const
{
    const auto& cells = cells_.at(static_cast<std::size_t>(ap));
    const auto it = cells.find(cell_of(ue));
    return it == cells.end() ? std::numeric_limits<double>::infinity() : it->second;
}

void PathlossMap::set(int ap, long ix, long iy, double pathloss_db)
{
    cells_.at(static_cast<std::size_t>(ap))[{ix, iy}] = pathloss_db;
}

void PathlossMap::erase(int ap, long ix, long iy)
{
    cells_.at(static_cast<std::size_t>(ap)).erase({ix, iy});
}

std::size_t PathlossMap::cell_count() const
{
    std::size_t n = 0;
    for (const auto& c : cells_)
        n += c.size();
    return n;
}

void PathlossMap::save(const std::filesystem::path& path) const
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write path-loss map " + path.string());
    out << fmt::format("{},{},{},{}\n", dx_, dy_, origin_.x, origin_.y);
    for (std::size_t ap = 0; ap < cells_.size(); ++ap)
        for (const auto& [cell, pl] : cells_[ap])
            out << fmt::format("{},{},{},{}\n", ap, cell.first, cell.second, pl);
}

PathlossMap load_pathloss_map(const std::filesystem::path& path, const NetworkTopology& topo)
{
    std::ifstream in(path);
    const std::string file = path.string();
    if (!in)
        throw ParseError(file, 0, "cannot open path-loss map");

    std::optional<PathlossMap> map;
    std::string line;
    std::size_t lineno = 0;
    const auto as_index = [&](std::string_view s) {
        const double v = detail::parse_double(s, file, lineno);
        if (v != std::floor(v))
            throw ParseError(file, lineno, "non-integer cell index (non-uniform grid spacing)");
        return static_cast<long>(v);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::is_blank_or_comment(line))
            continue;
        const auto f = detail::split_csv(line);
        if (!map) {
            if (f.size() != 4)
                throw ParseError(file, lineno, "expected header 'grid_dx,grid_dy,origin_x,origin_y'");
            const double dx = detail::parse_double(f[0], file, lineno);
            const double dy = detail::parse_double(f[1], file, lineno);
            if (!(dx > 0) || !(dy > 0))
                throw ParseError(file, lineno, "grid spacing must be positive");
            map.emplace(dx, dy, Point{detail::parse_double(f[2], file, lineno),
                                      detail::parse_double(f[3], file, lineno)},
                        static_cast<int>(topo.ap_count()));
            continue;
        }
        if (f.size() != 4)
            throw ParseError(file, lineno, "expected 'ap_id,cell_ix,cell_iy,pathloss_db'");
        const long ap = detail::parse_long(f[0], file, lineno);
        if (ap < 0 || ap >= static_cast<long>(topo.ap_count()))
            throw ParseError(file, lineno, fmt::format("unknown AP id {}", ap));
        const long ix = as_index(f[1]);
        const long iy = as_index(f[2]);
        map->set(static_cast<int>(ap), ix, iy, detail::parse_double(f[3], file, lineno));
    }
    if (!map)
        throw ParseError(file, 0, "missing header line");
    return std::move(*map);
}

// --- snapshots -------------------------------------------------------------------------------

Matrix pathloss_matrix(const NetworkTopology& topo, std::span<const Point> positions,
                       const PathlossProvider& provider)
{
    const auto m_count = static_cast<Eigen::Index>(topo.ap_count());
    const auto k_count = static_cast<Eigen::Index>(positions.size());
    Matrix pl(m_count, k_count);
    for (Eigen::Index m = 0; m < m_count; ++m)
        for (Eigen::Index k = 0; k < k_count; ++k)
            pl(m, k) = provider.pathloss_db(static_cast<int>(m), topo.ap_positions[static_cast<std::size_t>(m)],
                                            positions[static_cast<std::size_t>(k)]);
    return pl;
}

ChannelSnapshot snapshot_from_pathloss(Matrix pathloss_db, const RadioConfig& cfg)
{
    ChannelSnapshot snap;
    snap.noise_power = noise_power(cfg);
    snap.pathloss_db = std::move(pathloss_db);
    snap.beta.resize(snap.pathloss_db.rows(), snap.pathloss_db.cols());
    const double tx_dbm = 10.0 * std::log10(cfg.tx_power_per_link) + 30.0;
    for (Eigen::Index m = 0; m < snap.beta.rows(); ++m) {
        for (Eigen::Index k = 0; k < snap.beta.cols(); ++k) {
            const double pl = snap.pathloss_db(m, k);
            if (!std::isfinite(pl) || tx_dbm - pl < cfg.outage_dbm) {
                snap.beta(m, k) = 0.0;
                continue;
            }
            snap.beta(m, k) = cfg.tx_power_per_link / (std::pow(10.0, pl / 10.0) * snap.noise_power);
        }
    }
    return snap;
}

ChannelSnapshot snapshot(const NetworkTopology& topo, std::span<const Point> positions,
                         const PathlossProvider& provider, const RadioConfig& cfg)
{
    return snapshot_from_pathloss(pathloss_matrix(topo, positions, provider), cfg);
}

// --- small-scale fading ----------------------------------------------------------------------

double correlation_at_lag(double lag_slots, double speed, const RadioConfig& cfg)
{
    const double arg = 2.0 * std::numbers::pi * speed * cfg.carrier_freq / speed_of_light *
                       cfg.slot_duration * lag_slots;
    return std::cyl_bessel_j(0.0, std::abs(arg));
}

double aging_coefficient(int t, double speed, const RadioConfig& cfg)
{
    if (t < 0 || t >= cfg.block_len_slots)
        throw InvalidArgument(fmt::format("slot {} outside [0, {})", t, cfg.block_len_slots));
    return correlation_at_lag(static_cast<double>(t - cfg.pilot_len_slots - 1), speed, cfg);
}

CMatrix draw_complex_normal(const Matrix& variance, Rng& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    CMatrix out(variance.rows(), variance.cols());
    for (Eigen::Index k = 0; k < variance.cols(); ++k) {
        for (Eigen::Index m = 0; m < variance.rows(); ++m) {
            const double s = std::sqrt(variance(m, k) / 2.0);
            const double re = n(rng);
            const double im = n(rng);
            out(m, k) = Complex(s * re, s * im);
        }
    }
    return out;
}

FadingState draw_fading_state(const Matrix& variance, Rng& rng)
{
    return {draw_complex_normal(variance, rng), variance};
}

CMatrix realize_channel(const FadingState& state, const Vector& rho_per_ue, Rng& rng)
{
    if (rho_per_ue.size() != state.h0.cols())
        throw InvalidArgument("one aging coefficient per UE required");
    CMatrix g = draw_complex_normal(state.variance, rng);
    for (Eigen::Index k = 0; k < g.cols(); ++k) {
        const double rho = rho_per_ue(k);
        const double fresh = std::sqrt(std::max(0.0, 1.0 - rho * rho));
        g.col(k) = rho * state.h0.col(k) + fresh * g.col(k);
    }
    return g;
}

CMatrix realize_channel(const FadingState& state, int t, double speed, const RadioConfig& cfg, Rng& rng)
{
    const Vector rho = Vector::Constant(state.h0.cols(), aging_coefficient(t, speed, cfg));
    return realize_channel(state, rho, rng);
}

// --- estimation and pilots -------------------------------------------------------------------

double estimate_variance(double beta_mk, std::span<const double> copilot_betas, int t, double speed,
                         const RadioConfig& cfg, EstimatorForm form)
{
    const double rho = correlation_at_lag(static_cast<double>(cfg.pilot_len_slots + 1 - t), speed, cfg);
    const double sum = std::accumulate(copilot_betas.begin(), copilot_betas.end(), 0.0);
    if (form == EstimatorForm::conventional) {
        const double tp = cfg.pilot_len_slots;
        return rho * rho * tp * beta_mk * beta_mk / (tp * sum + 1.0);
    }
    const double n0 = noise_power(cfg);
    const double p = cfg.tx_power_per_link;
    return rho * rho * beta_mk * beta_mk * n0 / (p * sum * n0 + p);
}

std::vector<int> assign_pilots(int ue_count, int tau_p, std::uint64_t seed, bool sequential)
{
    if (ue_count < 1)
        throw InvalidArgument("UE count must be at least 1");
    if (tau_p < 1)
        throw InvalidArgument("pilot length must be at least 1");
    std::vector<int> pilots(static_cast<std::size_t>(ue_count));
    if (sequential) {
        for (int k = 0; k < ue_count; ++k)
            pilots[static_cast<std::size_t>(k)] = k % tau_p;
        return pilots;
    }
    Rng rng(seed);
    std::uniform_int_distribution<int> pick(0, tau_p - 1);
    for (auto& p : pilots)
        p = pick(rng);
    return pilots;
}

std::vector<std::vector<int>> copilot_sets(std::span<const int> pilots)
{
    std::vector<std::vector<int>> sets(pilots.size());
    for (std::size_t k = 0; k < pilots.size(); ++k)
        for (std::size_t i = 0; i < pilots.size(); ++i)
            if (pilots[i] == pilots[k])
                sets[k].push_back(static_cast<int>(i));
    return sets;
}

}  // namespace cfmimo
