// Acceptance suite: one PASS/FAIL line per criterion. Exit status is non-zero if any fails.

#include "cfmimo/harness.hpp"
#include "cfmimo/mdp.hpp"
#include "cfmimo/rng.hpp"
#include "oracles/bessel_oracle.hpp"
#include "oracles/selection_oracle.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

using namespace cfmimo;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::filesystem::path scratch(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("cfmimo_acceptance_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

ExperimentConfig desk()
{
    auto cfg = load_config(std::filesystem::path(CFMIMO_SOURCE_DIR) / "configs" / "desk.cfg");
    cfg.validate();
    return cfg;
}

const ComparisonRow& row(const ComparisonReport& rep, Algorithm a)
{
    for (const auto& r : rep.table)
        if (r.algorithm == a)
            return r;
    throw std::logic_error("algorithm missing from comparison");
}

// 1-3 share one desk comparison.
const ComparisonReport& desk_comparison()
{
    static const ComparisonReport rep = compare_algorithms(
        desk(), {Algorithm::full_cf, Algorithm::small_cell, Algorithm::unifsrv_heu, Algorithm::puc,
                 Algorithm::puc_const});
    return rep;
}

Outcome criterion1()
{
    const auto& rep = desk_comparison();
    const double ratio = row(rep, Algorithm::full_cf).sum_rate / row(rep, Algorithm::small_cell).sum_rate;
    return {ratio >= 2.5 && ratio <= 6.0, fmt::format("sum-rate ratio full-cf/small-cell = {:.3f}, need [2.5, 6]", ratio)};
}

Outcome criterion2()
{
    const auto& rep = desk_comparison();
    const double cf = row(rep, Algorithm::full_cf).jain;
    const double sc = row(rep, Algorithm::small_cell).jain;
    return {cf - sc >= 0.2 && cf >= 0.7,
            fmt::format("Jain full-cf = {:.3f}, small-cell = {:.3f}, gap {:.3f}, need gap >= 0.2 and full-cf >= 0.7",
                        cf, sc, cf - sc)};
}

Outcome criterion3()
{
    const auto& rep = desk_comparison();
    const double ref = row(rep, Algorithm::full_cf).median_se;
    bool ok = true;
    std::string detail = fmt::format("full-cf median SE {:.3f};", ref);
    for (auto a : {Algorithm::unifsrv_heu, Algorithm::puc, Algorithm::puc_const}) {
        const double share = row(rep, a).median_se / ref;
        ok = ok && share >= 0.7;
        detail += fmt::format(" {} {:.0f}%", to_string(a), 100 * share);
    }
    return {ok, detail + " (need >= 70%)"};
}

Outcome criterion4()
{
    auto cfg = desk();
    cfg.blocks = 1;
    cfg.clusters_per_side = 5;   // Q = 4, E Q = 12 <= G_max
    cfg.constraints.e_best = 3;
    int unif_ok = 0;
    int pucc_ok = 0;
    int cuc_ok = 0;
    int puc_bad = 0;
    for (int i = 0; i < 100; ++i) {
        cfg.seed = 1000 + static_cast<std::uint64_t>(i);
        const auto sc = prepare_scenario(cfg);
        const auto snap = sc.snapshot_at(0, cfg.radio);
        const auto& c = cfg.constraints;
        const auto u = check_constraints(select_unifsrv_heu(snap, c), c);
        const auto p = check_constraints(select_puc_const(snap, c), c);
        const auto q = check_constraints(select_cuc(snap, sc.topology, c), c);
        const auto f = check_constraints(select_puc(snap, c), c);
        unif_ok += u.ok();
        pucc_ok += p.ap_over_capacity == 0 && p.non_binary == 0;
        cuc_ok += q.ue_over_g_max == 0 && q.non_binary == 0;
        puc_bad += !f.ok();
    }
    return {unif_ok == 100 && pucc_ok == 100 && cuc_ok == 100,
            fmt::format("UnifSrv-heu both {}/100, PUC-const tau_p {}/100, CUC G_max {}/100, PUC violating {}/100",
                        unif_ok, pucc_ok, cuc_ok, puc_bad)};
}

// Per-AP path loss from the three-slope model plus deep shadow discs, gridded and saved.
void write_shadowed_map(const NetworkTopology& topo, const RadioConfig& radio, const std::filesystem::path& path,
                        std::uint64_t seed)
{
    const double step = 15.0;
    const long nx = static_cast<long>(topo.area.width / step);
    const long ny = static_cast<long>(topo.area.height / step);
    PathlossMap map(step, step, {0.0, 0.0}, static_cast<int>(topo.ap_count()));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 2 * std::numbers::pi);
    std::uniform_real_distribution<double> reach(40.0, 250.0);
    std::uniform_real_distribution<double> radius(60.0, 160.0);
    std::uniform_real_distribution<double> depth(20.0, 40.0);
    for (std::size_t m = 0; m < topo.ap_count(); ++m) {
        struct Disc {
            Point c;
            double r;
            double db;
        };
        std::vector<Disc> discs;
        for (int i = 0; i < 3; ++i) {
            const double a = angle(rng);
            const double d = reach(rng);
            const Point ap = topo.ap_positions[m];
            discs.push_back({{ap.x + d * std::cos(a), ap.y + d * std::sin(a)}, radius(rng), depth(rng)});
        }
        for (long ix = 0; ix <= nx; ++ix)
            for (long iy = 0; iy <= ny; ++iy) {
                const Point p = map.cell_center(ix, iy);
                double pl = pathloss_three_slope(std::max(distance(p, topo.ap_positions[m]), radio.near_field_clamp), radio);
                for (const auto& disc : discs)
                    if (distance(p, disc.c) < disc.r)
                        pl += disc.db;
                map.set(static_cast<int>(m), ix, iy, pl);
            }
    }
    map.save(path);
}

Outcome criterion5()
{
    auto cfg = desk();
    const auto dir = scratch("map");
    const auto topo = generate_ppp_topology(cfg.area, cfg.ap_count, derive_seed(cfg.seed, Stream::topology));
    save_topology(topo, dir / "aps.csv");
    write_shadowed_map(topo, cfg.radio, dir / "map.csv", 77);

    cfg.topology_source = TopologySource::file;
    cfg.topology_file = (dir / "aps.csv").string();
    cfg.channel_provider = ChannelProvider::map;
    cfg.pathloss_map_file = (dir / "map.csv").string();
    cfg.shadowing = false;
    cfg.blocks = 20;
    cfg.evaluation.n_mc = 200;
    cfg.validate();
    const auto rep = compare_algorithms(cfg, {Algorithm::unifsrv_heu, Algorithm::puc});
    const auto& u = row(rep, Algorithm::unifsrv_heu);
    const auto& p = row(rep, Algorithm::puc);
    const double g_ratio = u.mean_serving_size / p.mean_serving_size;
    const double r_ratio = u.sum_rate / p.sum_rate;
    return {g_ratio <= 0.7 && r_ratio >= 0.8,
            fmt::format("mean G UnifSrv-heu {:.2f} vs PUC {:.2f} (ratio {:.2f}, need <= 0.7), sum rate ratio {:.2f} "
                        "(need >= 0.8)",
                        u.mean_serving_size, p.mean_serving_size, g_ratio, r_ratio)};
}

bool same(const CooperationMatrix& d, const oracle::Bits& ref)
{
    for (int m = 0; m < d.ap_count(); ++m)
        for (int k = 0; k < d.ue_count(); ++k)
            if (d.serves(m, k) != (ref[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)] != 0))
                return false;
    return true;
}

Outcome criterion6()
{
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> db(-30.0, 30.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int instances = 0;
    int mismatches = 0;
    for (int m = 1; m <= 12; ++m)
        for (int k = 1; m * k <= 12; ++k)
            for (int trial = 0; trial < 40; ++trial) {
                ChannelSnapshot s;
                s.beta.resize(m, k);
                oracle::Grid b(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(k)));
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < k; ++j) {
                        // some links in outage
                        const double v = unit(rng) < 0.1 ? 0.0 : std::pow(10.0, db(rng) / 10.0);
                        s.beta(i, j) = v;
                        b[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = v;
                    }
                oracle::Params p;
                p.tau_p = 1 + trial % 3;
                p.g_max = 1 + trial % m;
                p.delta = 0.3 + 0.7 * unit(rng);
                p.beta0 = trial % 2 ? 0.05 : 0.0;
                p.e_best = 1 + trial % m;
                SelectionConstraints c;
                c.tau_p = p.tau_p;
                c.g_max = p.g_max;
                c.delta = p.delta;
                c.beta0 = p.beta0;
                c.e_best = p.e_best;
                NetworkTopology topo;
                topo.area = {90, 90};
                for (int i = 0; i < m; ++i)
                    topo.ap_positions.push_back({90 * unit(rng), 90 * unit(rng)});
                topo = build_square_clusters(topo, 3);
                mismatches += !same(select_unifsrv_heu(s, c), oracle::unifsrv(b, p));
                mismatches += !same(select_puc(s, c), oracle::puc(b, p));
                mismatches += !same(select_puc_const(s, c), oracle::puc_const(b, p));
                mismatches += !same(select_cuc(s, topo, c), oracle::cuc(b, topo.cluster_of_ap, p));
                mismatches += !same(select_small_cell(s), oracle::small_cell(b));
                mismatches += !same(select_full_cf(s), oracle::full_cf(b));
                ++instances;
            }

    // 2x2 hand enumeration: beta = [[3, 1], [1, 2]]
    ChannelSnapshot s;
    s.beta.resize(2, 2);
    s.beta << 3, 1, 1, 2;
    SelectionConstraints open;
    open.tau_p = 2;
    open.g_max = 2;
    open.beta0 = 0.0;
    const auto full = brute_force_selection(s, open, {1, 0, 0});
    open.tau_p = 1;
    const auto fair = brute_force_selection(s, open, {1, 1, 0.5});
    Eigen::MatrixXi expect_fair(2, 2);
    expect_fair << 1, 0, 1, 0;
    const bool brute_ok = full.total_connections() == 4 &&
                          std::abs(scalarized_objective(full, s.beta, {1, 0, 0}) - 7.0) < 1e-12 &&
                          fair.matrix() == expect_fair &&
                          std::abs(scalarized_objective(fair, s.beta, {1, 1, 0.5}) - 3.5) < 1e-12;
    return {mismatches == 0 && brute_ok,
            fmt::format("{} instances x 6 algorithms, {} mismatches; 2x2 brute force {}", instances, mismatches,
                        brute_ok ? "matches" : "differs")};
}

Outcome criterion7()
{
    std::vector<std::string> failed;
    auto expect = [&](bool ok, const std::string& what) {
        if (!ok)
            failed.push_back(what);
    };
    const RadioConfig radio;

    for (double bp : {radio.d0, radio.dc}) {
        const double eps = 1e-10;
        expect(std::abs(pathloss_three_slope(bp - eps, radio) - pathloss_three_slope(bp + eps, radio)) <= 1e-9,
               "breakpoint continuity");
    }

    bool rho_bounded = true;
    for (double v : {0.0, 0.8, 3.0, 10.0, 30.0})
        for (int t = 0; t < radio.block_len_slots; ++t)
            rho_bounded = rho_bounded && std::abs(aging_coefficient(t, v, radio)) <= 1.0;
    expect(rho_bounded, "|rho| <= 1");
    expect(aging_coefficient(radio.pilot_len_slots + 1, 10.0, radio) == 1.0, "rho at the pilot slot");
    const double j0_zero = 2.404825557695773;
    expect(std::abs(oracle::bessel_j0(j0_zero)) < 1e-12, "oracle J0 zero");
    const double lag = 100.0;
    const double v0 = j0_zero / (2 * std::numbers::pi * radio.carrier_freq / speed_of_light * radio.slot_duration * lag);
    expect(std::abs(aging_coefficient(radio.pilot_len_slots + 1 + 100, v0, radio)) <= 1e-6, "Bessel zero");

    {
        auto rng = make_rng(1, Stream::fading);
        const CMatrix h = draw_complex_normal(Matrix::Constant(100, 100, 2.5), rng);
        const double var = h.cwiseAbs2().mean();
        FadingState st{draw_complex_normal(Matrix::Constant(100, 100, 2.5), rng), Matrix::Constant(100, 100, 2.5)};
        const CMatrix aged = realize_channel(st, Vector::Constant(100, 0.6), rng);
        expect(std::abs(var / 2.5 - 1.0) <= 0.05, "fading variance");
        expect(std::abs(aged.cwiseAbs2().mean() / 2.5 - 1.0) <= 0.05, "aged fading variance");
    }

    {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(0.0, 5.0);
        bool ok = true;
        for (int trial = 0; trial < 200; ++trial) {
            Vector v(10);
            for (auto& x : v)
                x = u(rng);
            const double phi = jain_index(v);
            ok = ok && phi >= 0.1 - 1e-12 && phi <= 1.0 + 1e-12;
            ok = ok && std::abs(jain_index(Vector(v * 13.7)) - phi) <= 1e-12;
        }
        expect(ok, "Jain bounds and scale invariance");
    }

    {
        std::mt19937_64 rng(6);
        std::uniform_real_distribution<double> u(0.01, 10.0);
        bool ok = true;
        for (int trial = 0; trial < 100; ++trial) {
            Vector beta(8);
            for (auto& x : beta)
                x = u(rng);
            Vector mask = Vector::Zero(8);
            double prev = simplified_sinr(mask, beta);
            for (int m = 0; m < 8; ++m) {
                mask(m) = 1.0;
                const double s = simplified_sinr(mask, beta);
                ok = ok && s > prev;
                prev = s;
            }
        }
        expect(ok, "simplified SINR monotonicity");
    }

    double shift = 0.0;
    {
        auto cfg = desk();
        cfg.blocks = 10;
        const auto sc = prepare_scenario(cfg);
        const double a = median_se(run_algorithm(sc, cfg, Algorithm::full_cf).metrics);
        cfg.evaluation.n_mc = 1000;
        const double b = median_se(run_algorithm(sc, cfg, Algorithm::full_cf).metrics);
        shift = std::abs(b - a) / a;
        expect(shift < 0.03, "Monte-Carlo stability");
    }

    {
        auto cfg = desk();
        cfg.blocks = 5;
        cfg.evaluation.n_mc = 100;
        cfg.algorithm = Algorithm::unifsrv_heu;
        const auto dir = scratch("determinism");
        cfg.workers = 1;
        write_run(dir / "a", cfg, run_experiment(cfg));
        cfg.workers = 4;
        write_run(dir / "b", cfg, run_experiment(cfg));
        bool ok = true;
        for (const char* f : {"results.csv", "blocks.csv"})
            ok = ok && slurp(dir / "a" / f) == slurp(dir / "b" / f) && !slurp(dir / "a" / f).empty();
        expect(ok, "byte-identical reports");
    }

    std::string detail = fmt::format("median SE shift on N_mc doubling {:.2f}%", 100 * shift);
    for (const auto& f : failed)
        detail += "; failed: " + f;
    return {failed.empty(), detail};
}

MdpConfig hand_mdp(int budget)
{
    MdpConfig cfg;
    cfg.constraints.tau_p = 10;
    cfg.constraints.g_max = 3;
    cfg.constraints.beta0 = 0.0;
    cfg.round_budget = budget;
    return cfg;
}

// Return of a recorded episode computed from the reward definitions alone.
double replay(const Matrix& beta, const MdpConfig& cfg, const std::vector<std::vector<int>>& rounds)
{
    const auto mc = static_cast<int>(beta.rows());
    const auto kc = static_cast<int>(beta.cols());
    Eigen::MatrixXi d = Eigen::MatrixXi::Zero(mc, kc);
    double total = 0.0;
    for (int k = 0; k < kc; ++k) {
        for (int a : rounds[static_cast<std::size_t>(k)]) {
            if (d(a, k))
                continue;
            if (d.row(a).sum() >= cfg.constraints.tau_p) {
                total -= 1.0;
                continue;
            }
            d(a, k) = 1;
            total += cfg.w1 * beta(a, k) / beta.col(k).maxCoeff();
        }
        total += cfg.w2 * (1.0 - d.col(k).sum() / static_cast<double>(mc));
    }
    double sum = 0.0;
    double sq = 0.0;
    for (int k = 0; k < kc; ++k) {
        double served = 0.0;
        for (int m = 0; m < mc; ++m)
            served += d(m, k) * beta(m, k);
        const double s = served / (beta.col(k).sum() - served + 1.0);
        sum += s;
        sq += s * s;
    }
    return total + cfg.w3 * sum * sum * sum / (kc * sq);
}

Outcome criterion8()
{
    std::vector<std::string> failed;
    auto expect = [&](bool ok, const std::string& what) {
        if (!ok)
            failed.push_back(what);
    };
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); };

    Matrix beta(3, 2);
    beta << 10, 2, 5, 1, 1, 1;

    {
        MdpEnvironment env(beta, hand_mdp(3));
        const double r1[] = {1.0, 0.5, 0.1, 1.0, 0.5, 0.5};
        int i = 0;
        StepResult last;
        for (int a : {0, 1, 2, 0, 1, 2}) {
            last = env.step(a);
            expect(last.r1 == r1[i], fmt::format("scripted r1 step {}", i));
            ++i;
        }
        expect(last.done && last.r2 == 0.0, "scripted r2 at G = M");
        expect(close(last.r3, 2000.0 * 8000.0 / 544.0), "scripted r3");
    }
    {
        MdpEnvironment env(beta, hand_mdp(1));
        const auto a = env.step(0);
        expect(a.round_end && close(a.r2, 10.0 * 2.0 / 3.0), "budget-one r2");
        const auto b = env.step(0);
        const double s1 = 10.0 / 7.0;
        const double s2 = 2.0 / 3.0;
        const double r3 = 2000.0 * std::pow(s1 + s2, 3) / (2.0 * (s1 * s1 + s2 * s2));
        expect(b.done && close(b.r3, r3), "budget-one r3");
    }
    {
        Matrix full(2, 2);
        full << 5, 5, 1, 1;
        auto cfg = hand_mdp(1);
        cfg.constraints.tau_p = 1;
        cfg.constraints.g_max = 2;
        MdpEnvironment env(full, cfg);
        expect(env.step(0).r1 == 1.0, "argmax AP earns w1");
        const auto r = env.step(0);
        expect(r.r1 == -1.0, "full AP penalty");
        expect(r.r2 == 10.0, "empty serving set r2");
    }

    // every episode of the hand-trace instance, rounds of up to three steps
    const auto cfg = hand_mdp(3);
    double best = -1e300;
    int episodes = 0;
    int disagree = 0;
    std::vector<std::vector<int>> rounds(2);
    std::function<void(const MdpEnvironment&, double)> walk = [&](const MdpEnvironment& env, double acc) {
        if (env.done()) {
            ++episodes;
            disagree += !close(acc, replay(beta, cfg, rounds));
            best = std::max(best, acc);
            return;
        }
        for (int a : env.action_space()) {
            MdpEnvironment next = env;
            const int k = next.current_ue();
            rounds[static_cast<std::size_t>(k)].push_back(a);
            const double r = next.step(a).reward;
            walk(next, acc + r);
            rounds[static_cast<std::size_t>(k)].pop_back();
        }
    };
    walk(MdpEnvironment(beta, cfg), 0.0);
    MdpEnvironment env(beta, cfg);
    const auto greedy = run_episode(env, greedy_policy);
    expect(disagree == 0, "environment returns vs independent replay");
    expect(greedy.total_reward <= best + 1e-9, "greedy above the enumerated maximum");

    std::string detail = fmt::format("{} enumerated episodes, max return {:.4f}, greedy {:.4f} ({})", episodes, best,
                                     greedy.total_reward,
                                     close(greedy.total_reward, best) ? "maximal" : "not maximal");
    for (const auto& f : failed)
        detail += "; failed: " + f;
    return {failed.empty(), detail};
}

}  // namespace

int main()
{
    const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
        {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},
        {5, criterion5}, {6, criterion6}, {7, criterion7}, {8, criterion8},
    };
    const auto start = std::chrono::steady_clock::now();
    int failures = 0;
    for (const auto& [id, fn] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failures += !o.pass;
        std::printf("criterion %d: %s  %s  [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%d of %zu criteria passed in %.0f s\n", static_cast<int>(criteria.size()) - failures,
                criteria.size(), total);
    return failures == 0 ? 0 : 1;
}
