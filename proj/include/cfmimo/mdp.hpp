// SPDX-License-Identifier: Apache-2.0
//
// Episodic AP-selection environment. The agent decides serving APs one UE at a time; each
// action connects the current UE to one AP.
//
//   r1 (every step)   w1 * beta_{a,k} / beta_max,k, or -1 if the chosen AP already serves tau_p UEs
//   r2 (round end)    w2 * (1 - G_k / M)
//   r3 (episode end)  w3 * (sum S)^3 / (K sum S^2), S from the simplified SINR
//
// A round for UE k ends after `round_budget` steps or once G_k reaches g_max. Choosing an AP that
// already serves the current UE changes nothing and earns r1 = 0. UEs without any valid action
// end their round immediately; that round's r2 is carried into the next reward returned.

#pragma once

#include "cfmimo/selection.hpp"
#include "cfmimo/types.hpp"

#include <functional>
#include <vector>

namespace cfmimo {

struct MdpConfig {
    SelectionConstraints constraints;
    int round_budget = 100;
    double w1 = 1.0;
    double w2 = 10.0;
    double w3 = 2000.0;

    friend bool operator==(const MdpConfig&, const MdpConfig&) = default;
};

struct MdpState {
    int ue = 0;
    /// D_mk * beta_mk for the current UE.
    Vector masked_beta;
    /// Loads W of the current serving APs in descending-beta order, zero-padded to g_max.
    std::vector<int> load_head;
};

struct StepResult {
    MdpState state;
    double reward = 0.0;
    double r1 = 0.0;
    double r2 = 0.0;
    double r3 = 0.0;
    bool round_end = false;
    bool done = false;
};

class MdpEnvironment {
public:
    MdpEnvironment(Matrix beta, MdpConfig cfg);

    MdpState reset();
    /// Throws InvalidAction for an AP outside the current action space or after the episode ended.
    StepResult step(int action);

    /// Valid APs for the current UE: beta_mk > 0 and beta_mk >= beta0.
    const std::vector<int>& action_space() const;
    const MdpState& state() const { return state_; }
    const CooperationMatrix& cooperation() const { return d_; }
    const Matrix& beta() const { return beta_; }
    const MdpConfig& config() const { return cfg_; }
    int current_ue() const { return ue_; }
    int steps_in_round() const { return steps_; }
    bool done() const { return done_; }
    /// Reward earned by rounds that ended without a step (only non-zero before the first step).
    double pending_reward() const { return pending_; }

    /// r3 for the current cooperation matrix.
    double final_reward() const;

private:
    void advance_to_actionable_ue();
    void refresh_state();

    Matrix beta_;
    MdpConfig cfg_;
    std::vector<std::vector<int>> actions_;
    CooperationMatrix d_;
    MdpState state_;
    int ue_ = 0;
    int steps_ = 0;
    bool done_ = false;
    double pending_ = 0.0;
};

using Policy = std::function<int(const MdpEnvironment&)>;

/// Highest-beta AP in the action space that does not serve the UE yet and has W < tau_p. If none
/// exists it returns an AP already serving the UE (a no-op), else the highest-beta action.
int greedy_policy(const MdpEnvironment& env);

struct EpisodeResult {
    CooperationMatrix cooperation;
    double total_reward = 0.0;
    int steps = 0;
};

EpisodeResult run_episode(MdpEnvironment& env, const Policy& policy);

}  // namespace cfmimo
