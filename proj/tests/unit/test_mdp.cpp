#include "cfmimo/mdp.hpp"

#include <doctest.h>

#include <functional>

using namespace cfmimo;

namespace {

MdpConfig small_config(int tau_p, int g_max, int budget)
{
    MdpConfig cfg;
    cfg.constraints.tau_p = tau_p;
    cfg.constraints.g_max = g_max;
    cfg.constraints.beta0 = 0.0;
    cfg.round_budget = budget;
    cfg.w1 = 1.0;
    cfg.w2 = 10.0;
    cfg.w3 = 2000.0;
    return cfg;
}

// Reward of a fixed action sequence, computed from the reward definitions alone.
double replay_reward(const Matrix& beta, const MdpConfig& cfg, const std::vector<std::vector<int>>& rounds)
{
    const auto m_count = static_cast<int>(beta.rows());
    const auto k_count = static_cast<int>(beta.cols());
    std::vector<std::vector<int>> d(static_cast<std::size_t>(m_count), std::vector<int>(static_cast<std::size_t>(k_count), 0));
    double total = 0.0;
    for (int k = 0; k < k_count; ++k) {
        double best = 0.0;
        for (int m = 0; m < m_count; ++m)
            best = std::max(best, beta(m, k));
        for (int a : rounds[static_cast<std::size_t>(k)]) {
            int w = 0;
            for (int i = 0; i < k_count; ++i)
                w += d[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)];
            if (d[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)])
                continue;
            if (w >= cfg.constraints.tau_p) {
                total -= 1.0;
                continue;
            }
            d[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)] = 1;
            total += cfg.w1 * beta(a, k) / best;
        }
        int g = 0;
        for (int m = 0; m < m_count; ++m)
            g += d[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)];
        total += cfg.w2 * (1.0 - static_cast<double>(g) / m_count);
    }
    double sum = 0.0;
    double sq = 0.0;
    for (int k = 0; k < k_count; ++k) {
        double served = 0.0;
        double all = 0.0;
        for (int m = 0; m < m_count; ++m) {
            all += beta(m, k);
            if (d[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)])
                served += beta(m, k);
        }
        const double s = served / (all - served + 1.0);
        sum += s;
        sq += s * s;
    }
    if (sq > 0.0)
        total += cfg.w3 * sum * sum * sum / (k_count * sq);
    return total;
}

}  // namespace

TEST_CASE("first action on the strongest AP earns w1")
{
    Matrix beta(3, 1);
    beta << 2.0, 8.0, 1.0;
    MdpEnvironment env(beta, small_config(2, 3, 3));
    const auto r = env.step(1);
    CHECK(r.r1 == doctest::Approx(1.0));
    CHECK_FALSE(r.round_end);
    CHECK(env.state().masked_beta(1) == doctest::Approx(8.0));
    CHECK(env.state().masked_beta(0) == 0.0);
    const auto again = env.step(1);
    CHECK(again.r1 == 0.0);
    CHECK(env.cooperation().g(0) == 1);
}

TEST_CASE("a full AP costs -1 and changes nothing")
{
    Matrix beta(2, 2);
    beta << 5.0, 5.0, 1.0, 1.0;
    MdpEnvironment env(beta, small_config(1, 2, 1));
    env.step(0);
    const auto r = env.step(0);
    CHECK(r.r1 == -1.0);
    CHECK(env.cooperation().g(1) == 0);
}

TEST_CASE("an empty serving set yields r2 = w2")
{
    Matrix beta(2, 2);
    beta << 5.0, 5.0, 1.0, 1.0;
    MdpEnvironment env(beta, small_config(1, 2, 1));
    env.step(0);
    const auto r = env.step(0);
    CHECK(r.round_end);
    CHECK(r.done);
    CHECK(r.r2 == doctest::Approx(10.0));
}

TEST_CASE("round ends at g_max")
{
    Matrix beta(3, 2);
    beta << 3.0, 1.0, 2.0, 1.0, 1.0, 1.0;
    MdpEnvironment env(beta, small_config(5, 2, 10));
    CHECK_FALSE(env.step(0).round_end);
    const auto r = env.step(1);
    CHECK(r.round_end);
    CHECK(r.r2 == doctest::Approx(10.0 * (1.0 - 2.0 / 3.0)));
    CHECK(env.current_ue() == 1);
}

TEST_CASE("invalid actions")
{
    Matrix beta(2, 1);
    beta << 1.0, 0.0;
    MdpEnvironment env(beta, small_config(1, 1, 1));
    CHECK(env.action_space() == std::vector<int>{0});
    CHECK_THROWS_AS(env.step(1), InvalidAction);
    CHECK_THROWS_AS(env.step(7), InvalidAction);
    env.step(0);
    CHECK(env.done());
    CHECK_THROWS_AS(env.step(0), InvalidAction);
}

TEST_CASE("UEs without candidates are skipped")
{
    Matrix beta(2, 3);
    beta << 0.0, 4.0, 0.0, 0.0, 1.0, 0.0;
    MdpEnvironment env(beta, small_config(2, 2, 1));
    CHECK(env.current_ue() == 1);
    CHECK(env.pending_reward() == doctest::Approx(10.0));
    const auto r = env.step(0);
    CHECK(r.done);
    // pending r2 of UE0, own r2 and the skipped UE2
    CHECK(r.r2 == doctest::Approx(10.0 + 5.0 + 10.0));
}

TEST_CASE("exhaustive enumeration, K = 2, M = 3")
{
    Matrix beta(3, 2);
    beta << 4.0, 0.5, 1.0, 3.0, 0.25, 2.0;
    const auto cfg = small_config(1, 3, 2);

    double best = -1e300;
    int episodes = 0;
    std::vector<int> seq;
    std::function<void()> walk = [&]() {
        if (seq.size() == 4) {
            MdpEnvironment env(beta, cfg);
            double total = 0.0;
            for (int a : seq)
                total += env.step(a).reward;
            CHECK(env.done());
            const double ref = replay_reward(beta, cfg, {{seq[0], seq[1]}, {seq[2], seq[3]}});
            CHECK(total == doctest::Approx(ref).epsilon(1e-12));
            best = std::max(best, total);
            ++episodes;
            return;
        }
        for (int a = 0; a < 3; ++a) {
            seq.push_back(a);
            walk();
            seq.pop_back();
        }
    };
    walk();
    CHECK(episodes == 81);

    MdpEnvironment env(beta, cfg);
    const auto greedy = run_episode(env, greedy_policy);
    CHECK(greedy.steps == 4);
    CHECK(greedy.total_reward <= best + 1e-9);
    MESSAGE("greedy " << greedy.total_reward << " vs optimum " << best);
}

TEST_CASE("greedy respects pilot capacity")
{
    Matrix beta(4, 6);
    beta.setRandom();
    beta = beta.cwiseAbs().array() + 0.1;
    auto cfg = small_config(2, 3, 5);
    MdpEnvironment env(beta, cfg);
    const auto res = run_episode(env, greedy_policy);
    for (int m = 0; m < 4; ++m)
        CHECK(res.cooperation.w(m) <= 2);
    for (int k = 0; k < 6; ++k)
        CHECK(res.cooperation.g(k) <= 3);
}
