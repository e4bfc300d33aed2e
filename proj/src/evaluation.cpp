// SPDX-License-Identifier: Apache-2.0

#include "cfmimo/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

namespace cfmimo {

PrecodingContext PrecodingContext::build(const CooperationMatrix& d)
{
    PrecodingContext ctx;
    const int k_count = d.ue_count();
    ctx.serving_aps.resize(static_cast<std::size_t>(k_count));
    ctx.coserved_ues.resize(static_cast<std::size_t>(k_count));
    for (int k = 0; k < k_count; ++k) {
        ctx.serving_aps[static_cast<std::size_t>(k)] = d.serving_set(k);
        std::vector<char> seen(static_cast<std::size_t>(k_count), 0);
        for (int m : ctx.serving_aps[static_cast<std::size_t>(k)])
            for (int i = 0; i < k_count; ++i)
                if (d.serves(m, i))
                    seen[static_cast<std::size_t>(i)] = 1;
        for (int i = 0; i < k_count; ++i)
            if (seen[static_cast<std::size_t>(i)])
                ctx.coserved_ues[static_cast<std::size_t>(k)].push_back(i);
    }
    return ctx;
}

namespace {

// UEs with identical (M_k, S_k) share one regularised Gram matrix.
struct PrecoderGroup {
    std::vector<int> aps;
    std::vector<int> ues;
    std::vector<std::pair<int, int>> members;   // (UE, position inside ues)
};

std::vector<PrecoderGroup> make_groups(const PrecodingContext& ctx)
{
    std::map<std::pair<std::vector<int>, std::vector<int>>, std::size_t> index;
    std::vector<PrecoderGroup> groups;
    for (std::size_t k = 0; k < ctx.serving_aps.size(); ++k) {
        const auto& aps = ctx.serving_aps[k];
        if (aps.empty())
            continue;
        const auto& ues = ctx.coserved_ues[k];
        const auto pos = std::find(ues.begin(), ues.end(), static_cast<int>(k));
        if (pos == ues.end())
            throw InvalidState("UE missing from its own co-served set");
        auto [it, inserted] = index.try_emplace({aps, ues}, groups.size());
        if (inserted)
            groups.push_back({aps, ues, {}});
        groups[it->second].members.emplace_back(static_cast<int>(k),
                                                static_cast<int>(pos - ues.begin()));
    }
    return groups;
}

void precode_groups(const std::vector<PrecoderGroup>& groups, const CMatrix& estimates, CMatrix& out)
{
    out.setZero(estimates.rows(), estimates.cols());
    for (const auto& g : groups) {
        const CMatrix h = estimates(g.aps, g.ues);
        CMatrix gram = h.adjoint() * h;
        gram.diagonal().array() += 1.0;
        const Eigen::LDLT<CMatrix> ldlt(gram);
        for (const auto& [ue, pos] : g.members) {
            CVector e = CVector::Zero(static_cast<Eigen::Index>(g.ues.size()));
            e(pos) = 1.0;
            const CVector v = h * ldlt.solve(e);
            const double norm = v.norm();
            if (norm == 0.0)
                continue;
            for (std::size_t r = 0; r < g.aps.size(); ++r)
                out(g.aps[r], ue) = v(static_cast<Eigen::Index>(r)) / norm;
        }
    }
}

}  // namespace

CMatrix precode_pmmse(const PrecodingContext& ctx, const CMatrix& estimates)
{
    if (static_cast<Eigen::Index>(ctx.serving_aps.size()) != estimates.cols())
        throw InvalidState("precoding context and estimates disagree on the UE count");
    for (const auto& aps : ctx.serving_aps)
        for (int m : aps)
            if (m < 0 || m >= estimates.rows())
                throw InvalidState("serving AP outside the estimate matrix");
    CMatrix out;
    precode_groups(make_groups(ctx), estimates, out);
    return out;
}

Matrix link_amplitudes(const CooperationMatrix& d)
{
    Matrix a = Matrix::Zero(d.ap_count(), d.ue_count());
    for (int m = 0; m < d.ap_count(); ++m) {
        if (d.w(m) == 0)
            continue;
        const double amp = 1.0 / std::sqrt(static_cast<double>(d.w(m)));
        for (int k = 0; k < d.ue_count(); ++k)
            if (d.serves(m, k))
                a(m, k) = amp;
    }
    return a;
}

SinrAccumulator::SinrAccumulator(int ue_count)
    : sum_(CMatrix::Zero(ue_count, ue_count)), sum_sq_(Matrix::Zero(ue_count, ue_count))
{
}

void SinrAccumulator::add(const CMatrix& channel, const CMatrix& weighted_precoders)
{
    if (channel.cols() != sum_.cols() || weighted_precoders.cols() != sum_.cols() ||
        channel.rows() != weighted_precoders.rows())
        throw InvalidState("channel and precoder dimensions disagree");
    const CMatrix c = channel.adjoint() * weighted_precoders;
    sum_ += c;
    sum_sq_ += c.cwiseAbs2();
    ++draws_;
}

Vector SinrAccumulator::sinr(double noise) const
{
    const auto k_count = sum_.rows();
    Vector gamma = Vector::Zero(k_count);
    if (draws_ == 0)
        return gamma;
    const double n = draws_;
    for (Eigen::Index k = 0; k < k_count; ++k) {
        const double signal = std::norm(sum_(k, k) / n);
        const double interference = std::max(0.0, sum_sq_.row(k).sum() / n - signal);
        gamma(k) = signal / (interference + noise);
    }
    return gamma;
}

Vector instant_sinr(const LinkContext& link, const RadioConfig& radio, const EvaluationConfig& eval,
                    int t, Rng& rng)
{
    if (link.beta == nullptr || link.d == nullptr)
        throw InvalidState("link context is incomplete");
    const Matrix& beta = *link.beta;
    const CooperationMatrix& d = *link.d;
    const auto m_count = beta.rows();
    const auto k_count = beta.cols();
    if (d.ap_count() != m_count || d.ue_count() != k_count ||
        static_cast<Eigen::Index>(link.pilots.size()) != k_count ||
        static_cast<Eigen::Index>(link.speeds.size()) != k_count)
        throw InvalidState("link context dimensions disagree");
    if (eval.n_mc < 1)
        throw InvalidArgument("n_mc must be at least 1");

    const int tau_p = radio.pilot_len_slots;
    const double root_tp = std::sqrt(static_cast<double>(tau_p));
    const double n0 = noise_power(radio);

    Vector rho(k_count);
    for (Eigen::Index k = 0; k < k_count; ++k)
        rho(k) = aging_coefficient(t, link.speeds[static_cast<std::size_t>(k)], radio);
    const Vector fresh = (1.0 - rho.array().square()).max(0.0).sqrt();

    // MMSE estimate of the reference channel from the pilot observation y_{m, pilot(k)}.
    Matrix pilot_sum = Matrix::Zero(m_count, tau_p);
    for (Eigen::Index k = 0; k < k_count; ++k)
        pilot_sum.col(link.pilots[static_cast<std::size_t>(k)]) += beta.col(k);
    Matrix est_gain(m_count, k_count);
    for (Eigen::Index k = 0; k < k_count; ++k) {
        for (Eigen::Index m = 0; m < m_count; ++m) {
            const double b = beta(m, k);
            const double sum = pilot_sum(m, link.pilots[static_cast<std::size_t>(k)]);
            double gain = root_tp * b / (tau_p * sum + 1.0);
            if (eval.estimator == EstimatorForm::as_printed && b > 0.0) {
                const double z_conv = tau_p * b * b / (tau_p * sum + 1.0);
                const double z_printed = b * b / (sum * n0 + 1.0);
                gain *= std::sqrt(z_printed / z_conv);
            }
            est_gain(m, k) = gain * rho(k);
        }
    }

    const auto groups = make_groups(PrecodingContext::build(d));
    const Matrix amplitudes = link_amplitudes(d);
    const Matrix unit_noise = Matrix::Ones(m_count, tau_p);

    SinrAccumulator acc(static_cast<int>(k_count));
    CMatrix estimates(m_count, k_count);
    CMatrix precoders;
    const CMatrix weights = amplitudes.cast<Complex>();
    for (int draw = 0; draw < eval.n_mc; ++draw) {
        const CMatrix h0 = draw_complex_normal(beta, rng);
        CMatrix y = draw_complex_normal(unit_noise, rng);
        for (Eigen::Index k = 0; k < k_count; ++k)
            y.col(link.pilots[static_cast<std::size_t>(k)]) += root_tp * h0.col(k);
        for (Eigen::Index k = 0; k < k_count; ++k)
            estimates.col(k) = est_gain.col(k).cwiseProduct(y.col(link.pilots[static_cast<std::size_t>(k)]));

        CMatrix ht = draw_complex_normal(beta, rng);
        for (Eigen::Index k = 0; k < k_count; ++k)
            ht.col(k) = rho(k) * h0.col(k) + fresh(k) * ht.col(k);

        precode_groups(groups, estimates, precoders);
        acc.add(ht, precoders.cwiseProduct(weights));
    }
    return acc.sinr();
}

RateResult spectral_efficiency(const Vector& gamma, const RadioConfig& cfg)
{
    const double overhead = static_cast<double>(cfg.block_len_slots - cfg.pilot_len_slots) /
                            static_cast<double>(cfg.block_len_slots);
    RateResult out;
    out.se = overhead * (1.0 + gamma.array().max(0.0)).log2();
    out.rate = cfg.bandwidth * out.se;
    return out;
}

RateResult evaluate_block(const LinkContext& link, const RadioConfig& radio, const EvaluationConfig& eval,
                          Rng& rng)
{
    if (eval.slot_mode == SlotMode::worst)
        return spectral_efficiency(instant_sinr(link, radio, eval, radio.block_len_slots - 1, rng), radio);

    const int stride = std::max(1, eval.slot_stride);
    RateResult acc;
    int slots = 0;
    for (int t = radio.pilot_len_slots + 1; t < radio.block_len_slots; t += stride) {
        const auto r = spectral_efficiency(instant_sinr(link, radio, eval, t, rng), radio);
        if (slots == 0) {
            acc = r;
        } else {
            acc.se += r.se;
            acc.rate += r.rate;
        }
        ++slots;
    }
    acc.se /= slots;
    acc.rate /= slots;
    return acc;
}

ObjectiveValues objective_values(const CooperationMatrix& d, const Vector& rates)
{
    if (rates.size() != d.ue_count())
        throw InvalidArgument("one rate per UE required");
    ObjectiveValues out;
    out.sum_rate = rates.sum();
    out.jain = jain_index(rates);
    out.connections = d.total_connections();
    out.pf_objective = rates.array().max(pf_rate_floor).log().sum();
    return out;
}

ViolationReport check_constraints(const Eigen::MatrixXi& d, const SelectionConstraints& c)
{
    ViolationReport r;
    for (Eigen::Index m = 0; m < d.rows(); ++m)
        for (Eigen::Index k = 0; k < d.cols(); ++k)
            if (d(m, k) != 0 && d(m, k) != 1)
                ++r.non_binary;
    const Eigen::MatrixXi binary = (d.array() != 0).cast<int>();
    for (Eigen::Index m = 0; m < d.rows(); ++m)
        if (binary.row(m).sum() > c.tau_p)
            ++r.ap_over_capacity;
    for (Eigen::Index k = 0; k < d.cols(); ++k)
        if (binary.col(k).sum() > c.g_max)
            ++r.ue_over_g_max;
    return r;
}

ViolationReport check_constraints(const CooperationMatrix& d, const SelectionConstraints& c)
{
    return check_constraints(d.matrix(), c);
}

MetricsReport aggregate_metrics(std::span<const BlockRecord> blocks)
{
    MetricsReport r;
    if (blocks.empty())
        throw InvalidArgument("no blocks to aggregate");
    const auto k_count = blocks.front().rates.se.size();
    const auto m_count = static_cast<Eigen::Index>(blocks.front().ap_loads.size());
    const auto t_count = static_cast<Eigen::Index>(blocks.size());
    r.se.resize(k_count, t_count);
    r.rate.resize(k_count, t_count);
    r.serving_size.resize(k_count, t_count);
    r.ap_load.resize(m_count, t_count);
    double connections = 0.0;
    for (Eigen::Index b = 0; b < t_count; ++b) {
        const auto& rec = blocks[static_cast<std::size_t>(b)];
        r.se.col(b) = rec.rates.se;
        r.rate.col(b) = rec.rates.rate;
        for (Eigen::Index k = 0; k < k_count; ++k)
            r.serving_size(k, b) = rec.serving_sizes[static_cast<std::size_t>(k)];
        for (Eigen::Index m = 0; m < m_count; ++m)
            r.ap_load(m, b) = rec.ap_loads[static_cast<std::size_t>(m)];
        connections += rec.connections;
        r.violations.ap_over_capacity += rec.violations.ap_over_capacity;
        r.violations.ue_over_g_max += rec.violations.ue_over_g_max;
        r.violations.non_binary += rec.violations.non_binary;
        if (!rec.violations.ok())
            ++r.blocks_with_violations;
    }
    r.mean_rate = r.rate.rowwise().mean();
    r.mean_se = r.se.rowwise().mean();
    r.sum_rate = r.mean_rate.sum();
    r.jain = jain_index(r.mean_rate);
    r.pf_objective = r.mean_rate.array().max(pf_rate_floor).log().sum();
    r.mean_connections = connections / static_cast<double>(t_count);
    r.mean_serving_size = r.serving_size.cast<double>().mean();
    return r;
}

}  // namespace cfmimo
