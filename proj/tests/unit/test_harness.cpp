#include "cfmimo/harness.hpp"
#include "scratch.hpp"

#include <doctest.h>

using namespace cfmimo;

namespace {

ExperimentConfig tiny()
{
    auto cfg = parse_config(R"(seed = 5
blocks = 4
topology.ap_count = 16
topology.width = 200
topology.height = 200
mobility.ue_count = 4
mobility.speed = 1.5
evaluation.n_mc = 40
selection.g_max = 16
)");
    cfg.validate();
    return cfg;
}

}  // namespace

TEST_CASE("scenario preparation is deterministic")
{
    const auto cfg = tiny();
    const auto a = prepare_scenario(cfg);
    const auto b = prepare_scenario(cfg);
    CHECK(a.blocks == 4);
    CHECK(a.topology.ap_count() == 16);
    CHECK(a.pilots == b.pilots);
    for (int t = 0; t < a.blocks; ++t)
        CHECK(a.snapshot_at(t, cfg.radio).beta == b.snapshot_at(t, cfg.radio).beta);
    auto other = cfg;
    other.seed = 6;
    CHECK_FALSE(prepare_scenario(other).snapshot_at(0, cfg.radio).beta == a.snapshot_at(0, cfg.radio).beta);
}

TEST_CASE("minimal run")
{
    const auto run = run_experiment(tiny());
    CHECK(run.algorithm == Algorithm::full_cf);
    CHECK(run.metrics.block_count() == 4);
    CHECK(run.metrics.ue_count() == 4);
    CHECK(run.metrics.sum_rate > 0.0);
    CHECK(run.metrics.jain <= 1.0);
    CHECK(run.metrics.violations.non_binary == 0);
}

TEST_CASE("output does not depend on the worker count")
{
    auto cfg = tiny();
    const auto root = testing::scratch_dir("workers");
    cfg.workers = 1;
    write_run(root / "one", cfg, run_experiment(cfg));
    cfg.workers = 3;
    write_run(root / "three", cfg, run_experiment(cfg));
    for (const char* f : {"results.csv", "blocks.csv"})
        CHECK(testing::read_file(root / "one" / f) == testing::read_file(root / "three" / f));
    CHECK(testing::read_file(root / "one" / "results.csv").find("# config_hash") != std::string::npos);
}

TEST_CASE("comparison shares realizations")
{
    const auto cfg = tiny();
    const auto rep = compare_algorithms(cfg, {Algorithm::small_cell, Algorithm::full_cf});
    REQUIRE(rep.table.size() == 2);
    CHECK(rep.table[0].algorithm == Algorithm::small_cell);
    CHECK(rep.table[0].mean_serving_size == doctest::Approx(1.0));
    auto single = cfg;
    single.algorithm = Algorithm::full_cf;
    const auto alone = run_experiment(single);
    CHECK(alone.metrics.se == rep.runs[1].metrics.se);

    const auto dir = testing::scratch_dir("compare");
    write_comparison(dir, cfg, rep);
    CHECK(std::filesystem::exists(dir / "comparison.csv"));
    CHECK(std::filesystem::exists(dir / "small-cell" / "results.csv"));
}

TEST_CASE("empirical CDF")
{
    const auto c = empirical_cdf({3.0, 1.0, 2.0});
    REQUIRE(c.size() == 3);
    CHECK(c[0].value == 1.0);
    CHECK(c[0].cdf == doctest::Approx(1.0 / 3.0));
    CHECK(c[1].cdf == doctest::Approx(2.0 / 3.0));
    CHECK(c[2].cdf == 1.0);

    const auto cfg = tiny();
    const auto run = run_experiment(cfg);
    const auto dir = testing::scratch_dir("cdf");
    write_run(dir, cfg, run);
    const auto from_disk = export_cdf(dir);
    CHECK(from_disk.size() == 16);
    CHECK(std::filesystem::exists(dir / "cdf.csv"));
    const auto direct = export_cdf(run.metrics);
    REQUIRE(direct.size() == from_disk.size());
    for (std::size_t i = 0; i < direct.size(); ++i)
        CHECK(direct[i].value == doctest::Approx(from_disk[i].value).epsilon(1e-9));
    CHECK_THROWS(export_cdf(dir / "nope"));
}

TEST_CASE("bad inputs surface as config errors")
{
    auto cfg = tiny();
    cfg.topology_source = TopologySource::file;
    cfg.topology_file = "/nonexistent/aps.csv";
    CHECK_THROWS_AS(prepare_scenario(cfg), ConfigError);
}
