// SPDX-License-Identifier: Apache-2.0
//
// Downlink SINR, spectral efficiency and the objective values of a cooperation matrix.
//
// All channels here are noise-normalised: entry (m, k) has variance beta_mk, so noise power is 1
// and link powers enter as the ratio p_mk / p_baseline = 1 / W_m (equal split of the AP budget).

#pragma once

#include "cfmimo/channel.hpp"
#include "cfmimo/selection.hpp"
#include "cfmimo/types.hpp"

#include <span>
#include <vector>

namespace cfmimo {

enum class SlotMode {
    /// Last slot of the block, where aging is strongest.
    worst,
    /// Mean SE over data slots tau_p+1 .. tau_c-1 taken every `slot_stride` slots.
    average,
};

struct EvaluationConfig {
    int n_mc = 500;
    SlotMode slot_mode = SlotMode::worst;
    int slot_stride = 19;
    EstimatorForm estimator = EstimatorForm::conventional;

    friend bool operator==(const EvaluationConfig&, const EvaluationConfig&) = default;
};

/// Serving APs M_k and co-served UEs S_k (UEs sharing at least one serving AP with k; k included
/// whenever M_k is non-empty).
struct PrecodingContext {
    std::vector<std::vector<int>> serving_aps;
    std::vector<std::vector<int>> coserved_ues;

    static PrecodingContext build(const CooperationMatrix& d);
};

/// Partial-MMSE precoders over each UE's serving set: w_k proportional to
/// (sum_{i in S_k} h_i h_i^H + I)^-1 h_k restricted to M_k, unit norm. Returns an M x K matrix with
/// zeros outside M_k. `estimates` holds the noise-normalised channel estimates.
CMatrix precode_pmmse(const PrecodingContext& ctx, const CMatrix& estimates);

/// sqrt(p_mk / p_baseline) = 1/sqrt(W_m) on served links, 0 elsewhere.
Matrix link_amplitudes(const CooperationMatrix& d);

/// Use-and-then-forget SINR estimator. For every draw the effective gains
/// c_ki = sum_m conj(h_mk) u_mi (u = amplitude-weighted precoder) are accumulated; then
/// gamma_k = |E c_kk|^2 / (sum_i E|c_ki|^2 - |E c_kk|^2 + noise).
class SinrAccumulator {
public:
    explicit SinrAccumulator(int ue_count);

    void add(const CMatrix& channel, const CMatrix& weighted_precoders);
    Vector sinr(double noise = 1.0) const;
    int draws() const { return draws_; }

private:
    CMatrix sum_;
    Matrix sum_sq_;
    int draws_ = 0;
};

/// Everything the Monte-Carlo SINR needs for one block.
struct LinkContext {
    const Matrix* beta = nullptr;
    const CooperationMatrix* d = nullptr;
    std::span<const int> pilots;
    /// Speed of every UE, m/s.
    std::span<const double> speeds;
};

/// Monte-Carlo SINR at slot t: draws reference channels, contaminated pilot observations, MMSE
/// estimates and aged channels; precodes on the estimates and accumulates effective gains.
Vector instant_sinr(const LinkContext& link, const RadioConfig& radio, const EvaluationConfig& eval,
                    int t, Rng& rng);

struct RateResult {
    Vector se;     // bit/s/Hz
    Vector rate;   // bit/s
};

/// R_k = B (tau_c - tau_p)/tau_c log2(1 + gamma_k).
RateResult spectral_efficiency(const Vector& gamma, const RadioConfig& cfg);

/// SE for one block under the configured slot mode.
RateResult evaluate_block(const LinkContext& link, const RadioConfig& radio, const EvaluationConfig& eval,
                          Rng& rng);

struct ObjectiveValues {
    double sum_rate = 0.0;
    double jain = 1.0;
    int connections = 0;
    /// sum log(max(R_k, 1 bit/s)).
    double pf_objective = 0.0;
};

inline constexpr double pf_rate_floor = 1.0;

ObjectiveValues objective_values(const CooperationMatrix& d, const Vector& rates);

struct ViolationReport {
    int ap_over_capacity = 0;   // APs with W_m > tau_p
    int ue_over_g_max = 0;      // UEs with G_k > g_max
    int non_binary = 0;         // entries outside {0, 1}

    bool ok() const { return ap_over_capacity == 0 && ue_over_g_max == 0 && non_binary == 0; }
};

ViolationReport check_constraints(const Eigen::MatrixXi& d, const SelectionConstraints& c);
ViolationReport check_constraints(const CooperationMatrix& d, const SelectionConstraints& c);

struct BlockRecord {
    RateResult rates;
    std::vector<int> serving_sizes;
    std::vector<int> ap_loads;
    int connections = 0;
    ViolationReport violations;
};

struct MetricsReport {
    /// K x T per-UE SE and rate, one column per block.
    Matrix se;
    Matrix rate;
    /// K x T serving-set sizes, M x T AP loads.
    Eigen::MatrixXi serving_size;
    Eigen::MatrixXi ap_load;

    Vector mean_rate;   // time-averaged R_k
    Vector mean_se;
    double sum_rate = 0.0;
    double jain = 1.0;
    double pf_objective = 0.0;
    double mean_connections = 0.0;
    double mean_serving_size = 0.0;
    ViolationReport violations;   // summed over blocks
    int blocks_with_violations = 0;

    int ue_count() const { return static_cast<int>(se.rows()); }
    int block_count() const { return static_cast<int>(se.cols()); }
};

MetricsReport aggregate_metrics(std::span<const BlockRecord> blocks);

}  // namespace cfmimo
