// SPDX-License-Identifier: Apache-2.0
//
// Large-scale SNR per block and small-scale fading with channel aging.
//
// Two unit systems appear here. Path loss is in dB, noise in watts, and beta_mk = p/(L n0) is a
// linear SNR. The Monte-Carlo machinery works with noise-normalised channels whose variance is
// beta_mk (the channel h_mk scaled by sqrt(p/n0)); estimate variances in that system carry the
// same scaling.

#pragma once

#include "cfmimo/rng.hpp"
#include "cfmimo/topology.hpp"
#include "cfmimo/types.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace cfmimo {

inline constexpr double speed_of_light = 299792458.0;
inline constexpr double boltzmann = 1.380649e-23;
inline constexpr double reference_temperature = 290.0;

enum class DistanceUnit { kilometres, metres };

struct RadioConfig {
    double carrier_freq = 2.0e9;       // Hz
    double bandwidth = 20.0e6;         // Hz
    double noise_figure = 9.0;         // dB
    double slot_duration = 1.0e-4;     // s
    int block_len_slots = 200;
    int pilot_len_slots = 10;
    double tx_power_per_link = 0.2;    // W, per-AP budget; baseline p_mk for beta
    double ap_height = 12.5;           // m
    double ue_height = 1.65;           // m
    double shadowing_sigma = 8.0;      // dB
    double d0 = 10.0;                  // m
    double dc = 50.0;                  // m
    double near_field_clamp = 1.0;     // m
    double outage_dbm = -250.0;        // received power below this is outage
    /// Unit of d inside the log10 terms of the three-slope model.
    DistanceUnit distance_unit = DistanceUnit::kilometres;

    double block_duration() const { return slot_duration * block_len_slots; }
    void validate() const;

    friend bool operator==(const RadioConfig&, const RadioConfig&) = default;
};

/// Hata/COST-231 intercept L0 in dB (carrier frequency in MHz, heights in metres).
double hata_intercept(const RadioConfig& cfg);

/// Three-slope log-distance mean path loss in dB; continuous at d0 and dc.
double pathloss_three_slope(double d, const RadioConfig& cfg);

/// Adds sigma * z_mk with z_mk iid N(0,1) drawn row-major from `seed`. The same seed always gives
/// the same field, so shadowing stays fixed per AP-UE pair for a run.
Matrix apply_shadowing(const Matrix& pathloss_db, double sigma, std::uint64_t seed);

/// Thermal noise k_B T0 B NF in watts.
double noise_power(const RadioConfig& cfg);

class PathlossProvider {
public:
    virtual ~PathlossProvider() = default;
    /// Path loss in dB; +infinity marks outage.
    virtual double pathloss_db(int ap, const Point& ap_pos, const Point& ue) const = 0;
};

class LogDistanceProvider final : public PathlossProvider {
public:
    explicit LogDistanceProvider(RadioConfig cfg) : cfg_(std::move(cfg)) {}
    double pathloss_db(int ap, const Point& ap_pos, const Point& ue) const override;

private:
    RadioConfig cfg_;
};

/// Gridded per-AP path loss, e.g. exported from a raytracer. Lookups go to the nearest grid
/// point; cells absent from the map are outage.
class PathlossMap final : public PathlossProvider {
public:
    PathlossMap(double grid_dx, double grid_dy, Point origin, int ap_count);

    double pathloss_db(int ap, const Point& ap_pos, const Point& ue) const override;

    void set(int ap, long ix, long iy, double pathloss_db);
    void erase(int ap, long ix, long iy);
    std::pair<long, long> cell_of(const Point& p) const;
    Point cell_center(long ix, long iy) const;
    std::size_t cell_count() const;

    double grid_dx() const { return dx_; }
    double grid_dy() const { return dy_; }
    Point origin() const { return origin_; }
    int ap_count() const { return static_cast<int>(cells_.size()); }

    void save(const std::filesystem::path& path) const;

private:
    double dx_;
    double dy_;
    Point origin_;
    std::vector<std::map<std::pair<long, long>, double>> cells_;
};

PathlossMap load_pathloss_map(const std::filesystem::path& path, const NetworkTopology& topo);

struct ChannelSnapshot {
    Matrix beta;          // M x K linear SNR, 0 for outage
    Matrix pathloss_db;   // M x K, +inf for outage
    double noise_power = 0.0;

    int ap_count() const { return static_cast<int>(beta.rows()); }
    int ue_count() const { return static_cast<int>(beta.cols()); }
};

Matrix pathloss_matrix(const NetworkTopology& topo, std::span<const Point> positions,
                       const PathlossProvider& provider);

/// beta_mk = p/(L_mk n0) from a path-loss matrix; links whose received power falls below the
/// outage threshold get beta = 0.
ChannelSnapshot snapshot_from_pathloss(Matrix pathloss_db, const RadioConfig& cfg);

ChannelSnapshot snapshot(const NetworkTopology& topo, std::span<const Point> positions,
                         const PathlossProvider& provider, const RadioConfig& cfg);

/// J0(2 pi v fc / c * Ts * lag).
double correlation_at_lag(double lag_slots, double speed, const RadioConfig& cfg);

/// rho[t] relative to the pilot reference slot tau_p + 1.
double aging_coefficient(int t, double speed, const RadioConfig& cfg);

/// Complex Gaussian CN(0, variance) entries.
CMatrix draw_complex_normal(const Matrix& variance, Rng& rng);

struct FadingState {
    CMatrix h0;        // channel at the reference slot
    Matrix variance;   // per-link variance (R_mk, or beta_mk when noise-normalised)
};

FadingState draw_fading_state(const Matrix& variance, Rng& rng);

/// h[t] = rho_k h[0] + sqrt(1 - rho_k^2) g[t], with fresh g ~ CN(0, variance) and one rho per UE.
CMatrix realize_channel(const FadingState& state, const Vector& rho_per_ue, Rng& rng);
CMatrix realize_channel(const FadingState& state, int t, double speed, const RadioConfig& cfg, Rng& rng);

enum class EstimatorForm {
    /// rho^2 tau_p beta^2 / (tau_p sum_{P_k} beta + 1), noise-normalised units.
    conventional,
    /// rho^2 beta^2 n0 / (p sum_{P_k} beta n0 + p), exactly as printed.
    as_printed,
};

/// MMSE channel-estimate variance Z_mk[t]. `copilot_betas` holds beta_mi for every UE i sharing
/// UE k's pilot, including k itself.
double estimate_variance(double beta_mk, std::span<const double> copilot_betas, int t, double speed,
                         const RadioConfig& cfg, EstimatorForm form = EstimatorForm::conventional);

/// One pilot index in [0, tau_p) per UE; `sequential` gives UE k pilot k mod tau_p.
std::vector<int> assign_pilots(int ue_count, int tau_p, std::uint64_t seed, bool sequential = false);

/// For each UE k, the UEs sharing its pilot (ascending, k included).
std::vector<std::vector<int>> copilot_sets(std::span<const int> pilots);

}  // namespace cfmimo
