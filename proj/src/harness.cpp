// SPDX-License-Identifier: Apache-2.0

#include "cfmimo/harness.hpp"

#include "text_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

namespace cfmimo {

RunError::RunError(int block, const std::string& what)
    : std::runtime_error(fmt::format("block {}: {}", block, what)), block_(block)
{
}

ChannelSnapshot Scenario::snapshot_at(int b, const RadioConfig& radio) const
{
    const auto positions = trace.at_block(static_cast<std::size_t>(b));
    Matrix pl = pathloss_matrix(topology, positions, *provider);
    if (shadowing_db.size() > 0)
        pl += shadowing_db;
    return snapshot_from_pathloss(std::move(pl), radio);
}

Scenario prepare_scenario(const ExperimentConfig& cfg)
{
    cfg.validate();
    Scenario s;
    try {
        if (cfg.topology_source == TopologySource::ppp)
            s.topology = generate_ppp_topology(cfg.area, cfg.ap_count, derive_seed(cfg.seed, Stream::topology));
        else
            s.topology = load_topology(cfg.topology_file);
        if (cfg.clusters_per_side > 0)
            s.topology = build_square_clusters(s.topology, cfg.clusters_per_side);
        const int m_count = static_cast<int>(s.topology.ap_positions.size());
        cfg.constraints.validate(m_count);

        const double block_duration = cfg.radio.block_duration();
        if (cfg.mobility_source == MobilitySource::rwp) {
            RwpParams p;
            p.ue_count = cfg.ue_count;
            p.speed = cfg.speed;
            p.block_duration = block_duration;
            p.duration = cfg.blocks * block_duration;
            p.mean_transition = cfg.mean_transition;
            p.boundary = cfg.boundary;
            s.trace = generate_rwp(s.topology.area, p, cfg.seed);
        } else {
            s.trace = load_tracks(cfg.tracks_file, block_duration, s.topology.area);
        }
        s.blocks = std::min(cfg.blocks, static_cast<int>(s.trace.block_count()));
        if (s.blocks < 1)
            throw ConfigError("mobility trace covers no complete block");
        const int k_count = static_cast<int>(s.trace.ue_count());

        if (cfg.channel_provider == ChannelProvider::log_distance) {
            s.provider = std::make_shared<LogDistanceProvider>(cfg.radio);
            if (cfg.shadowing && cfg.radio.shadowing_sigma > 0)
                s.shadowing_db = apply_shadowing(Matrix::Zero(m_count, k_count), cfg.radio.shadowing_sigma,
                                                 derive_seed(cfg.seed, Stream::shadowing));
        } else {
            s.provider = std::make_shared<PathlossMap>(load_pathloss_map(cfg.pathloss_map_file, s.topology));
        }
        s.pilots = assign_pilots(k_count, cfg.radio.pilot_len_slots, derive_seed(cfg.seed, Stream::pilots),
                                 cfg.sequential_pilots);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return s;
}

namespace {

BlockRecord run_block(const Scenario& s, const ExperimentConfig& cfg, Algorithm algorithm, int b)
{
    const auto snap = s.snapshot_at(b, cfg.radio);
    const auto d = select(algorithm, snap, s.topology, cfg.constraints, cfg.mdp);
    auto rng = make_rng(cfg.seed, Stream::fading, static_cast<std::uint64_t>(b));
    LinkContext link;
    link.beta = &snap.beta;
    link.d = &d;
    link.pilots = s.pilots;
    link.speeds = s.trace.speed;

    BlockRecord rec;
    rec.rates = evaluate_block(link, cfg.radio, cfg.evaluation, rng);
    rec.serving_sizes = d.serving_sizes();
    rec.ap_loads = d.ap_loads();
    rec.connections = d.total_connections();
    rec.violations = check_constraints(d, cfg.constraints);
    return rec;
}

}  // namespace

RunReport run_algorithm(const Scenario& scenario, const ExperimentConfig& cfg, Algorithm algorithm)
{
    const int blocks = scenario.blocks;
    std::vector<BlockRecord> records(static_cast<std::size_t>(blocks));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(blocks));

    unsigned workers = cfg.workers > 0 ? static_cast<unsigned>(cfg.workers) : std::thread::hardware_concurrency();
    workers = std::clamp(workers, 1u, static_cast<unsigned>(blocks));

    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    auto work = [&] {
        for (int b = next++; b < blocks && !failed; b = next++) {
            try {
                records[static_cast<std::size_t>(b)] = run_block(scenario, cfg, algorithm, b);
            } catch (...) {
                errors[static_cast<std::size_t>(b)] = std::current_exception();
                failed = true;
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < workers; ++i)
            pool.emplace_back(work);
        for (auto& t : pool)
            t.join();
    }
    for (int b = 0; b < blocks; ++b) {
        if (!errors[static_cast<std::size_t>(b)])
            continue;
        try {
            std::rethrow_exception(errors[static_cast<std::size_t>(b)]);
        } catch (const std::exception& e) {
            throw RunError(b, e.what());
        }
    }

    RunReport out;
    out.algorithm = algorithm;
    out.metrics = aggregate_metrics(records);
    return out;
}

RunReport run_experiment(const ExperimentConfig& cfg)
{
    return run_algorithm(prepare_scenario(cfg), cfg, cfg.algorithm);
}

double median_se(const MetricsReport& m)
{
    std::vector<double> v(m.se.data(), m.se.data() + m.se.size());
    if (v.empty())
        return 0.0;
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

ComparisonReport compare_algorithms(const ExperimentConfig& cfg, const std::vector<Algorithm>& algorithms)
{
    if (algorithms.empty())
        throw ConfigError("no algorithms to compare");
    if (std::find(algorithms.begin(), algorithms.end(), Algorithm::cuc) != algorithms.end() &&
        cfg.clusters_per_side < 1)
        throw ConfigError("cuc needs topology.clusters_per_side >= 1");
    const auto scenario = prepare_scenario(cfg);
    ComparisonReport out;
    for (const auto a : algorithms) {
        out.runs.push_back(run_algorithm(scenario, cfg, a));
        const auto& m = out.runs.back().metrics;
        out.table.push_back({a, m.sum_rate, m.jain, m.mean_serving_size, m.mean_connections, m.pf_objective,
                             median_se(m)});
    }
    return out;
}

namespace {

// Linear interpolation between order statistics.
double percentile(std::vector<double> v, double q)
{
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
    return out;
}

}  // namespace

void write_run(const std::filesystem::path& dir, const ExperimentConfig& cfg, const RunReport& run)
{
    std::filesystem::create_directories(dir);
    const auto& m = run.metrics;
    {
        auto out = open_out(dir / "results.csv");
        out << "# cfmimo results\n";
        out << fmt::format("# algorithm={}\n", to_string(run.algorithm));
        out << fmt::format("# seed={}\n", cfg.seed);
        out << fmt::format("# config_hash={:016x}\n", config_hash(cfg));
        out << fmt::format("# blocks={}\n", m.block_count());
        out << fmt::format("# ues={}\n", m.ue_count());
        out << fmt::format("# aps={}\n", m.ap_load.rows());
        out << fmt::format("# pf_rate_floor_bps={}\n", pf_rate_floor);
        out << "ue_id,mean_se,p95_se,mean_G\n";
        for (int k = 0; k < m.ue_count(); ++k) {
            std::vector<double> se(static_cast<std::size_t>(m.block_count()));
            for (int b = 0; b < m.block_count(); ++b)
                se[static_cast<std::size_t>(b)] = m.se(k, b);
            // value exceeded in 95% of blocks
            out << fmt::format("{},{},{},{}\n", k, m.mean_se(k), percentile(se, 0.05),
                               m.serving_size.row(k).cast<double>().mean());
        }
        out << "metric,value\n";
        out << fmt::format("sum_rate,{}\n", m.sum_rate);
        out << fmt::format("jain,{}\n", m.jain);
        out << fmt::format("pf_objective,{}\n", m.pf_objective);
        out << fmt::format("mean_connections,{}\n", m.mean_connections);
        out << fmt::format("mean_serving_size,{}\n", m.mean_serving_size);
        out << fmt::format("median_se,{}\n", median_se(m));
        out << fmt::format("violations_ap_capacity,{}\n", m.violations.ap_over_capacity);
        out << fmt::format("violations_g_max,{}\n", m.violations.ue_over_g_max);
        out << fmt::format("violations_non_binary,{}\n", m.violations.non_binary);
        out << fmt::format("blocks_with_violations,{}\n", m.blocks_with_violations);
    }
    {
        auto out = open_out(dir / "blocks.csv");
        out << "block,ue_id,se,rate,serving_size\n";
        for (int b = 0; b < m.block_count(); ++b)
            for (int k = 0; k < m.ue_count(); ++k)
                out << fmt::format("{},{},{},{},{}\n", b, k, m.se(k, b), m.rate(k, b), m.serving_size(k, b));
    }
    {
        auto out = open_out(dir / "config.txt");
        out << serialize_config(cfg);
    }
}

void write_comparison(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                      const ComparisonReport& report)
{
    std::filesystem::create_directories(dir);
    for (const auto& run : report.runs)
        write_run(dir / std::string(to_string(run.algorithm)), cfg, run);
    auto out = open_out(dir / "comparison.csv");
    out << fmt::format("# seed={}\n", cfg.seed);
    out << fmt::format("# config_hash={:016x}\n", config_hash(cfg));
    out << "algorithm,sum_rate,jain,mean_G,mean_connections,pf_objective,median_se\n";
    for (const auto& r : report.table)
        out << fmt::format("{},{},{},{},{},{},{}\n", to_string(r.algorithm), r.sum_rate, r.jain,
                           r.mean_serving_size, r.mean_connections, r.pf_objective, r.median_se);
}

std::vector<CdfPoint> empirical_cdf(std::vector<double> values)
{
    std::sort(values.begin(), values.end());
    std::vector<CdfPoint> out(values.size());
    const auto n = static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        out[i] = {values[i], static_cast<double>(i + 1) / n};
    return out;
}

std::vector<CdfPoint> export_cdf(const MetricsReport& m)
{
    return empirical_cdf(std::vector<double>(m.se.data(), m.se.data() + m.se.size()));
}

std::vector<CdfPoint> export_cdf(const std::filesystem::path& run_dir)
{
    const auto path = run_dir / "blocks.csv";
    std::ifstream in(path);
    if (!in)
        throw ConfigError(fmt::format("no blocks.csv in '{}'", run_dir.string()));
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    std::ptrdiff_t se_col = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::is_blank_or_comment(line))
            continue;
        const auto cells = detail::split_csv(line);
        if (se_col < 0) {
            const auto it = std::find(cells.begin(), cells.end(), "se");
            if (it == cells.end())
                throw ParseError(path.string(), line_no, "header has no 'se' column");
            se_col = it - cells.begin();
            continue;
        }
        if (static_cast<std::ptrdiff_t>(cells.size()) <= se_col)
            throw ParseError(path.string(), line_no, "short row");
        values.push_back(detail::parse_double(cells[static_cast<std::size_t>(se_col)], path.string(), line_no));
    }
    const auto cdf = empirical_cdf(std::move(values));
    auto out = open_out(run_dir / "cdf.csv");
    out << "se,cdf\n";
    for (const auto& p : cdf)
        out << fmt::format("{},{}\n", p.value, p.cdf);
    return cdf;
}

}  // namespace cfmimo
