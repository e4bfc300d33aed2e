// SPDX-License-Identifier: Apache-2.0

#include "cfmimo/mdp.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace cfmimo {

MdpEnvironment::MdpEnvironment(Matrix beta, MdpConfig cfg)
    : beta_(std::move(beta)), cfg_(std::move(cfg)),
      d_(static_cast<int>(beta_.rows()), static_cast<int>(beta_.cols()))
{
    if (beta_.cols() < 1 || beta_.rows() < 1)
        throw InvalidArgument("environment needs at least one AP and one UE");
    if (cfg_.round_budget < 1)
        throw InvalidArgument("round budget must be at least 1");
    cfg_.constraints.validate(static_cast<int>(beta_.rows()));
    for (Eigen::Index k = 0; k < beta_.cols(); ++k)
        actions_.push_back(candidate_order(beta_.col(k), cfg_.constraints.beta0));
    reset();
}

MdpState MdpEnvironment::reset()
{
    d_ = CooperationMatrix(static_cast<int>(beta_.rows()), static_cast<int>(beta_.cols()));
    ue_ = 0;
    steps_ = 0;
    done_ = false;
    pending_ = 0.0;
    advance_to_actionable_ue();
    refresh_state();
    return state_;
}

const std::vector<int>& MdpEnvironment::action_space() const
{
    static const std::vector<int> empty;
    return done_ ? empty : actions_[static_cast<std::size_t>(ue_)];
}

double MdpEnvironment::final_reward() const
{
    const Vector s = simplified_sinr_all(d_, beta_);
    const double sum = s.sum();
    const double sq = s.squaredNorm();
    if (sq == 0.0)
        return 0.0;
    return cfg_.w3 * sum * sum * sum / (static_cast<double>(s.size()) * sq);
}

void MdpEnvironment::advance_to_actionable_ue()
{
    const auto m_count = static_cast<double>(beta_.rows());
    while (ue_ < static_cast<int>(beta_.cols()) && actions_[static_cast<std::size_t>(ue_)].empty()) {
        pending_ += cfg_.w2 * (1.0 - d_.g(ue_) / m_count);
        ++ue_;
    }
    if (ue_ >= static_cast<int>(beta_.cols())) {
        done_ = true;
        ue_ = static_cast<int>(beta_.cols()) - 1;
    }
}

void MdpEnvironment::refresh_state()
{
    state_.ue = ue_;
    state_.masked_beta = d_.mask(ue_).cwiseProduct(beta_.col(ue_));
    state_.load_head.assign(static_cast<std::size_t>(cfg_.constraints.g_max), 0);
    std::size_t slot = 0;
    for (int m : candidate_order(beta_.col(ue_), 0.0)) {
        if (slot >= state_.load_head.size())
            break;
        if (d_.serves(m, ue_))
            state_.load_head[slot++] = d_.w(m);
    }
}

StepResult MdpEnvironment::step(int action)
{
    if (done_)
        throw InvalidAction("episode already finished");
    const auto& valid = actions_[static_cast<std::size_t>(ue_)];
    if (std::find(valid.begin(), valid.end(), action) == valid.end())
        throw InvalidAction(fmt::format("AP {} is not a valid action for UE {}", action, ue_));

    StepResult out;
    const int k = ue_;
    if (d_.serves(action, k)) {
        out.r1 = 0.0;
    } else if (d_.w(action) >= cfg_.constraints.tau_p) {
        out.r1 = -1.0;
    } else {
        d_.connect(action, k);
        out.r1 = cfg_.w1 * beta_(action, k) / beta_.col(k).maxCoeff();
    }
    ++steps_;

    // Rounds that ended before the first step of the episode.
    out.r2 = pending_;
    out.reward = out.r1 + pending_;
    pending_ = 0.0;

    if (steps_ >= cfg_.round_budget || d_.g(k) >= cfg_.constraints.g_max) {
        out.round_end = true;
        const double r2 = cfg_.w2 * (1.0 - static_cast<double>(d_.g(k)) / static_cast<double>(beta_.rows()));
        out.r2 += r2;
        out.reward += r2;
        steps_ = 0;
        ++ue_;
        advance_to_actionable_ue();
        // Rounds skipped without a step belong to this transition.
        out.reward += pending_;
        out.r2 += pending_;
        pending_ = 0.0;
        if (done_) {
            out.r3 = final_reward();
            out.reward += out.r3;
        }
    }
    out.done = done_;
    refresh_state();
    out.state = state_;
    return out;
}

int greedy_policy(const MdpEnvironment& env)
{
    const auto& actions = env.action_space();
    if (actions.empty())
        throw InvalidAction("no action available");
    const int k = env.current_ue();
    const auto& d = env.cooperation();
    // actions are already in descending-beta order
    for (int m : actions)
        if (!d.serves(m, k) && d.w(m) < env.config().constraints.tau_p)
            return m;
    for (int m : actions)
        if (d.serves(m, k))
            return m;
    return actions.front();
}

EpisodeResult run_episode(MdpEnvironment& env, const Policy& policy)
{
    EpisodeResult out;
    env.reset();
    if (env.done()) {
        out.total_reward = env.pending_reward() + env.final_reward();
        out.cooperation = env.cooperation();
        return out;
    }
    while (!env.done()) {
        const auto r = env.step(policy(env));
        out.total_reward += r.reward;
        ++out.steps;
    }
    out.cooperation = env.cooperation();
    return out;
}

}  // namespace cfmimo
