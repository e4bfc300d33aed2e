// SPDX-License-Identifier: Apache-2.0

#include "cfmimo/selection.hpp"

#include "cfmimo/mdp.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace cfmimo {

CooperationMatrix::CooperationMatrix(int ap_count, int ue_count)
    : d_(Eigen::MatrixXi::Zero(ap_count, ue_count)),
      g_(static_cast<std::size_t>(ue_count), 0),
      w_(static_cast<std::size_t>(ap_count), 0)
{
}

CooperationMatrix CooperationMatrix::from_matrix(const Eigen::MatrixXi& d)
{
    CooperationMatrix out(static_cast<int>(d.rows()), static_cast<int>(d.cols()));
    for (Eigen::Index m = 0; m < d.rows(); ++m) {
        for (Eigen::Index k = 0; k < d.cols(); ++k) {
            if (d(m, k) != 0 && d(m, k) != 1)
                throw InvalidArgument(fmt::format("D({}, {}) = {} is not binary", m, k, d(m, k)));
            if (d(m, k) == 1)
                out.connect(static_cast<int>(m), static_cast<int>(k));
        }
    }
    return out;
}

void CooperationMatrix::connect(int m, int k)
{
    if (d_(m, k) != 0)
        return;
    d_(m, k) = 1;
    ++g_[static_cast<std::size_t>(k)];
    ++w_[static_cast<std::size_t>(m)];
}

void CooperationMatrix::disconnect(int m, int k)
{
    if (d_(m, k) == 0)
        return;
    d_(m, k) = 0;
    --g_[static_cast<std::size_t>(k)];
    --w_[static_cast<std::size_t>(m)];
}

int CooperationMatrix::total_connections() const
{
    return std::accumulate(g_.begin(), g_.end(), 0);
}

std::vector<int> CooperationMatrix::serving_set(int k) const
{
    std::vector<int> out;
    for (int m = 0; m < ap_count(); ++m)
        if (serves(m, k))
            out.push_back(m);
    return out;
}

std::vector<int> CooperationMatrix::served_ues(int m) const
{
    std::vector<int> out;
    for (int k = 0; k < ue_count(); ++k)
        if (serves(m, k))
            out.push_back(k);
    return out;
}

void SelectionConstraints::validate(int ap_count) const
{
    if (g_max < 1 || g_max > ap_count)
        throw InvalidArgument(fmt::format("g_max must lie in [1, {}]", ap_count));
    if (tau_p < 0)
        throw InvalidArgument("tau_p must be non-negative");
    if (!(delta > 0.0) || delta > 1.0)
        throw InvalidArgument("delta must lie in (0, 1]");
    if (e_best < 1)
        throw InvalidArgument("e_best must be at least 1");
    if (beta0 < 0.0)
        throw InvalidArgument("beta0 must be non-negative");
}

double simplified_sinr(const Eigen::Ref<const Vector>& served_mask, const Eigen::Ref<const Vector>& beta)
{
    if (served_mask.size() != beta.size())
        throw InvalidArgument("mask and beta lengths differ");
    const double served = served_mask.dot(beta);
    return served / (beta.sum() - served + 1.0);
}

Vector simplified_sinr_all(const CooperationMatrix& d, const Matrix& beta)
{
    Vector s(d.ue_count());
    for (int k = 0; k < d.ue_count(); ++k)
        s(k) = simplified_sinr(d.mask(k), beta.col(k));
    return s;
}

double jain_index(std::span<const double> values)
{
    if (values.empty())
        throw InvalidArgument("Jain index of an empty vector");
    double sum = 0.0;
    double sq = 0.0;
    for (double v : values) {
        sum += v;
        sq += v * v;
    }
    if (sq == 0.0)
        return 1.0;
    return sum * sum / (static_cast<double>(values.size()) * sq);
}

double jain_index(const Vector& values)
{
    return jain_index(std::span<const double>(values.data(), static_cast<std::size_t>(values.size())));
}

std::vector<int> candidate_order(const Eigen::Ref<const Vector>& beta_col, double beta0)
{
    std::vector<int> order;
    for (Eigen::Index m = 0; m < beta_col.size(); ++m)
        if (beta_col(m) > 0.0 && beta_col(m) >= beta0)
            order.push_back(static_cast<int>(m));
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return beta_col(a) > beta_col(b); });
    return order;
}

namespace {

std::vector<std::vector<int>> all_orders(const Matrix& beta, double beta0)
{
    std::vector<std::vector<int>> orders;
    orders.reserve(static_cast<std::size_t>(beta.cols()));
    for (Eigen::Index k = 0; k < beta.cols(); ++k)
        orders.push_back(candidate_order(beta.col(k), beta0));
    return orders;
}

// Running sum(D beta) per UE; the full-service sums stay fixed.
struct SnrSums {
    explicit SnrSums(const Matrix& beta) : total(beta.colwise().sum().transpose()), served(Vector::Zero(beta.cols())) {}

    double sinr(int k) const { return served(k) / (total(k) - served(k) + 1.0); }

    Vector total;
    Vector served;
};

}  // namespace

CooperationMatrix select_unifsrv_heu(const ChannelSnapshot& snap, const SelectionConstraints& c)
{
    const Matrix& beta = snap.beta;
    const int ap_count = snap.ap_count();
    const int ue_count = snap.ue_count();
    CooperationMatrix d(ap_count, ue_count);
    const auto orders = all_orders(beta, c.beta0);
    SnrSums sums(beta);
    Vector s = Vector::Zero(ue_count);

    const auto has_room = [&](int m) {
        return c.allow_tau_p_equality ? d.w(m) <= c.tau_p : d.w(m) < c.tau_p;
    };

    // Best AP with free capacity.
    for (int k = 0; k < ue_count; ++k) {
        for (int m : orders[static_cast<std::size_t>(k)]) {
            if (has_room(m) && d.g(k) < c.g_max) {
                d.connect(m, k);
                sums.served(k) += beta(m, k);
                break;
            }
        }
        s(k) = sums.sinr(k);
    }

    std::vector<double> sorted(static_cast<std::size_t>(ue_count));
    for (int rank = 1; rank < ap_count; ++rank) {
        const double phi = jain_index(s);
        std::copy(s.data(), s.data() + ue_count, sorted.begin());
        std::sort(sorted.begin(), sorted.end());
        // Guard against 1 - phi landing a few ulps above an integer boundary.
        auto idx = static_cast<long>(std::ceil((1.0 - phi) * ue_count - 1e-9));
        if (c.one_based_threshold)
            idx = std::clamp(idx, 1L, static_cast<long>(ue_count)) - 1;
        idx = std::clamp(idx, 0L, static_cast<long>(ue_count) - 1);
        const double alpha = sorted[static_cast<std::size_t>(idx)];

        for (int k = 0; k < ue_count; ++k) {
            const auto& order = orders[static_cast<std::size_t>(k)];
            if (rank < static_cast<int>(order.size())) {
                const int m = order[static_cast<std::size_t>(rank)];
                if (s(k) < alpha && !d.serves(m, k) && has_room(m) && d.g(k) < c.g_max &&
                    sums.served(k) < c.delta * sums.total(k)) {
                    d.connect(m, k);
                    sums.served(k) += beta(m, k);
                }
            }
            s(k) = sums.sinr(k);
        }
    }
    return d;
}

CooperationMatrix select_puc(const ChannelSnapshot& snap, const SelectionConstraints& c)
{
    const Matrix& beta = snap.beta;
    CooperationMatrix d(snap.ap_count(), snap.ue_count());
    SnrSums sums(beta);
    for (int k = 0; k < snap.ue_count(); ++k) {
        for (int m : candidate_order(beta.col(k), c.beta0)) {
            if (!(sums.served(k) < c.delta * sums.total(k)))
                break;
            d.connect(m, k);
            sums.served(k) += beta(m, k);
        }
    }
    return d;
}

CooperationMatrix select_puc_const(const ChannelSnapshot& snap, const SelectionConstraints& c)
{
    const Matrix& beta = snap.beta;
    CooperationMatrix d(snap.ap_count(), snap.ue_count());
    for (int k = 0; k < snap.ue_count(); ++k) {
        for (int m : candidate_order(beta.col(k), c.beta0)) {
            if (d.w(m) < c.tau_p) {
                d.connect(m, k);
                continue;
            }
            int worst = -1;
            for (int i = 0; i < snap.ue_count(); ++i)
                if (d.serves(m, i) && (worst < 0 || beta(m, i) < beta(m, worst)))
                    worst = i;
            if (worst >= 0 && beta(m, worst) < beta(m, k)) {
                d.disconnect(m, worst);
                d.connect(m, k);
            }
        }
    }
    return d;
}

CooperationMatrix select_cuc(const ChannelSnapshot& snap, const NetworkTopology& topo,
                             const SelectionConstraints& c)
{
    if (!topo.has_clusters())
        throw InvalidState("CUC needs a topology with a cluster assignment");
    if (static_cast<int>(topo.ap_count()) != snap.ap_count())
        throw InvalidState("topology and snapshot disagree on the AP count");
    const auto members = topo.cluster_members();
    CooperationMatrix d(snap.ap_count(), snap.ue_count());
    for (int k = 0; k < snap.ue_count(); ++k) {
        const auto order = candidate_order(snap.beta.col(k), c.beta0);
        const auto e = std::min<std::size_t>(order.size(), static_cast<std::size_t>(c.e_best));
        for (std::size_t i = 0; i < e; ++i) {
            const int cluster = topo.cluster_of_ap[static_cast<std::size_t>(order[i])];
            for (int m : members[static_cast<std::size_t>(cluster)])
                d.connect(m, k);
        }
    }
    return d;
}

CooperationMatrix select_small_cell(const ChannelSnapshot& snap, double beta0)
{
    CooperationMatrix d(snap.ap_count(), snap.ue_count());
    for (int k = 0; k < snap.ue_count(); ++k) {
        const auto order = candidate_order(snap.beta.col(k), beta0);
        if (!order.empty())
            d.connect(order.front(), k);
    }
    return d;
}

CooperationMatrix select_full_cf(const ChannelSnapshot& snap, double beta0)
{
    CooperationMatrix d(snap.ap_count(), snap.ue_count());
    for (int k = 0; k < snap.ue_count(); ++k)
        for (int m = 0; m < snap.ap_count(); ++m)
            if (snap.beta(m, k) > 0.0 && snap.beta(m, k) >= beta0)
                d.connect(m, k);
    return d;
}

double scalarized_objective(const CooperationMatrix& d, const Matrix& beta, const ObjectiveWeights& w)
{
    const Vector s = simplified_sinr_all(d, beta);
    return w.sum_sinr * s.sum() + w.fairness * jain_index(s) - w.connections * d.total_connections();
}

CooperationMatrix brute_force_selection(const ChannelSnapshot& snap, const SelectionConstraints& c,
                                        const ObjectiveWeights& w)
{
    const int ap_count = snap.ap_count();
    const int ue_count = snap.ue_count();
    const int bits = ap_count * ue_count;
    if (bits > 20)
        throw InvalidArgument(fmt::format("brute force refuses M*K = {} > 20", bits));

    CooperationMatrix best(ap_count, ue_count);
    double best_value = -std::numeric_limits<double>::infinity();
    const std::uint32_t count = 1U << bits;
    for (std::uint32_t mask = 0; mask < count; ++mask) {
        CooperationMatrix d(ap_count, ue_count);
        for (int b = 0; b < bits; ++b)
            if ((mask >> b) & 1U)
                d.connect(b / ue_count, b % ue_count);
        const auto& loads = d.ap_loads();
        const auto& sizes = d.serving_sizes();
        if (std::any_of(loads.begin(), loads.end(), [&](int x) { return x > c.tau_p; }) ||
            std::any_of(sizes.begin(), sizes.end(), [&](int x) { return x > c.g_max; }))
            continue;
        const double value = scalarized_objective(d, snap.beta, w);
        if (value > best_value) {
            best_value = value;
            best = std::move(d);
        }
    }
    return best;
}

namespace {

constexpr std::array<std::pair<Algorithm, std::string_view>, 7> algorithm_names{{
    {Algorithm::unifsrv_heu, "unifsrv-heu"},
    {Algorithm::puc, "puc"},
    {Algorithm::puc_const, "puc-const"},
    {Algorithm::cuc, "cuc"},
    {Algorithm::small_cell, "small-cell"},
    {Algorithm::full_cf, "full-cf"},
    {Algorithm::mdp_greedy, "mdp-greedy"},
}};

}  // namespace

std::string_view to_string(Algorithm a)
{
    for (const auto& [alg, name] : algorithm_names)
        if (alg == a)
            return name;
    return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name)
{
    for (const auto& [alg, n] : algorithm_names)
        if (n == name)
            return alg;
    return std::nullopt;
}

const std::vector<Algorithm>& all_algorithms()
{
    static const std::vector<Algorithm> all = [] {
        std::vector<Algorithm> v;
        for (const auto& entry : algorithm_names)
            v.push_back(entry.first);
        return v;
    }();
    return all;
}

CooperationMatrix select(Algorithm a, const ChannelSnapshot& snap, const NetworkTopology& topo,
                         const SelectionConstraints& c, const MdpConfig& mdp)
{
    switch (a) {
    case Algorithm::unifsrv_heu:
        return select_unifsrv_heu(snap, c);
    case Algorithm::puc:
        return select_puc(snap, c);
    case Algorithm::puc_const:
        return select_puc_const(snap, c);
    case Algorithm::cuc:
        return select_cuc(snap, topo, c);
    case Algorithm::small_cell:
        return select_small_cell(snap);
    case Algorithm::full_cf:
        return select_full_cf(snap);
    case Algorithm::mdp_greedy: {
        MdpConfig cfg = mdp;
        cfg.constraints = c;
        MdpEnvironment env(snap.beta, cfg);
        return run_episode(env, greedy_policy).cooperation;
    }
    }
    throw InvalidArgument("unknown algorithm");
}

}  // namespace cfmimo
