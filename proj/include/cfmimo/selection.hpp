// SPDX-License-Identifier: Apache-2.0
//
// AP selection: the cooperation matrix D and the algorithms that fill it from a snapshot's
// large-scale SNR matrix beta (M APs x K UEs).
//
// Shared conventions for every algorithm:
//   - APs with beta_mk <= 0 or beta_mk < beta0 are never candidates for UE k (outage).
//   - beta ties are broken by the lowest AP index, UEs are processed in ascending id order.

#pragma once

#include "cfmimo/channel.hpp"
#include "cfmimo/topology.hpp"
#include "cfmimo/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cfmimo {

class CooperationMatrix {
public:
    CooperationMatrix() = default;
    CooperationMatrix(int ap_count, int ue_count);

    /// Throws InvalidArgument if any entry is not 0 or 1.
    static CooperationMatrix from_matrix(const Eigen::MatrixXi& d);

    int ap_count() const { return static_cast<int>(w_.size()); }
    int ue_count() const { return static_cast<int>(g_.size()); }

    bool serves(int m, int k) const { return d_(m, k) != 0; }
    void connect(int m, int k);
    void disconnect(int m, int k);

    /// Serving-set size G_k.
    int g(int k) const { return g_[static_cast<std::size_t>(k)]; }
    /// AP load W_m.
    int w(int m) const { return w_[static_cast<std::size_t>(m)]; }
    const std::vector<int>& serving_sizes() const { return g_; }
    const std::vector<int>& ap_loads() const { return w_; }
    int total_connections() const;

    std::vector<int> serving_set(int k) const;
    std::vector<int> served_ues(int m) const;

    Eigen::MatrixXi matrix() const { return d_; }
    /// 0/1 mask of UE k's serving set as doubles.
    Vector mask(int k) const { return d_.col(k).cast<double>(); }

    friend bool operator==(const CooperationMatrix& a, const CooperationMatrix& b)
    {
        return a.d_ == b.d_;
    }

private:
    Eigen::MatrixXi d_;
    std::vector<int> g_;
    std::vector<int> w_;
};

struct SelectionConstraints {
    int g_max = 30;
    int tau_p = 10;
    /// Fraction of the full-service SNR sum after which a UE stops adding APs.
    double delta = 0.95;
    /// Number of best APs whose clusters form a CUC serving set.
    int e_best = 3;
    /// Linear SNR threshold for valid candidates.
    double beta0 = 0.01;
    /// Lets UnifSrv-heu connect an AP whose load already equals tau_p.
    bool allow_tau_p_equality = false;
    /// Reads the UnifSrv-heu threshold rank as 1-based (clamped to [1, K]).
    bool one_based_threshold = false;

    void validate(int ap_count) const;

    friend bool operator==(const SelectionConstraints&, const SelectionConstraints&) = default;
};

/// Simplified SINR proxy: sum(D beta) / (sum(beta) - sum(D beta) + 1), linear scale.
double simplified_sinr(const Eigen::Ref<const Vector>& served_mask, const Eigen::Ref<const Vector>& beta);
/// simplified_sinr for every UE.
Vector simplified_sinr_all(const CooperationMatrix& d, const Matrix& beta);

/// Jain's index (sum v)^2 / (K sum v^2); returns 1 for an all-zero vector.
double jain_index(std::span<const double> values);
double jain_index(const Vector& values);

/// Candidate APs of one UE in descending beta order (ties: lower index first), outage removed.
std::vector<int> candidate_order(const Eigen::Ref<const Vector>& beta_col, double beta0);

CooperationMatrix select_unifsrv_heu(const ChannelSnapshot& snap, const SelectionConstraints& c);
CooperationMatrix select_puc(const ChannelSnapshot& snap, const SelectionConstraints& c);
CooperationMatrix select_puc_const(const ChannelSnapshot& snap, const SelectionConstraints& c);
/// Throws InvalidState when the topology carries no cluster assignment.
CooperationMatrix select_cuc(const ChannelSnapshot& snap, const NetworkTopology& topo,
                             const SelectionConstraints& c);
CooperationMatrix select_small_cell(const ChannelSnapshot& snap, double beta0 = 0.0);
CooperationMatrix select_full_cf(const ChannelSnapshot& snap, double beta0 = 0.0);

struct ObjectiveWeights {
    double sum_sinr = 1.0;
    double fairness = 0.0;
    double connections = 0.0;
};

/// Scalarised objective: w1 * sum S_k + w2 * Jain(S) - w3 * sum D.
double scalarized_objective(const CooperationMatrix& d, const Matrix& beta, const ObjectiveWeights& w);

/// Exhaustive search over all 2^(MK) matrices satisfying W_m <= tau_p and G_k <= G_max. Ties keep
/// the lowest enumeration index (bit m*K + k set means D_mk = 1). Refuses M*K > 20.
CooperationMatrix brute_force_selection(const ChannelSnapshot& snap, const SelectionConstraints& c,
                                        const ObjectiveWeights& w);

enum class Algorithm { unifsrv_heu, puc, puc_const, cuc, small_cell, full_cf, mdp_greedy };

std::string_view to_string(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view name);
const std::vector<Algorithm>& all_algorithms();

struct MdpConfig;

/// Runs the named algorithm. `mdp` is used only by Algorithm::mdp_greedy.
CooperationMatrix select(Algorithm a, const ChannelSnapshot& snap, const NetworkTopology& topo,
                         const SelectionConstraints& c, const MdpConfig& mdp);

}  // namespace cfmimo
