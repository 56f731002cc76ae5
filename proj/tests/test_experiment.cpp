#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "km/experiment.hpp"
#include "km/util.hpp"

using namespace km;

namespace {
std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}
}  // namespace

TEST_CASE("config parsing") {
    auto cfg = parse_config(
        "graphon = constant:0.5\nfreq = cauchy:0.5\nn = 2000\nK = 1.2:3.0:0.2\nT = 200");
    CHECK(cfg.n == 2000);
    CHECK(cfg.k_values.size() == 10);
    CHECK(cfg.k_values.front() == doctest::Approx(1.2));
    CHECK(cfg.k_values.back() == doctest::Approx(3.0));
    CHECK(cfg.T == 200.0);

    // comments and blank lines
    auto c2 = parse_config("# header\n\ngraphon = constant:1\nfreq = gaussian:1\nn = 10\nK = 2\n");
    CHECK(c2.k_values.size() == 1);

    // empty K range
    CHECK_THROWS_AS(parse_config("graphon = constant:1\nfreq = cauchy:0.5\nn = 10\nK = 3.0:1.2:0.2"),
                    ConfigError);
    // unknown graphon alias: error names accepted kinds
    try {
        parse_config("graphon = smallworld:0.1:0.25\nfreq = cauchy:0.5\nn = 10\nK = 1");
        CHECK(false);
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("small_world") != std::string::npos);
    }
    // unknown key: no silent typo tolerance
    CHECK_THROWS_AS(parse_config("graphon = constant:1\nfreq = cauchy:0.5\nn = 10\nK = 1\nTT = 5"),
                    ConfigError);
    // syntax errors carry the line number
    try {
        parse_config("graphon = constant:1\nnonsense line\n");
        CHECK(false);
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    // semantic violations are all listed at once
    try {
        parse_config("graphon = constant:1\nfreq = cauchy:0.5\nn = -5\nK = 1\nseeds = 0");
        CHECK(false);
    } catch (const ConfigError& e) {
        std::string msg = e.what();
        CHECK(msg.find("n") != std::string::npos);
        CHECK(msg.find("seeds") != std::string::npos);
    }
}

TEST_CASE("config hash is canonical") {
    auto a = parse_config("graphon = constant:0.5\nfreq = cauchy:0.5\nn = 100\nK = 1\nT = 50");
    auto b = parse_config("T = 50\nn = 100\nK = 1\nfreq = cauchy:0.5\ngraphon = constant:0.5");
    CHECK(a.hash() == b.hash());
    auto c = parse_config("graphon = constant:0.5\nfreq = cauchy:0.5\nn = 101\nK = 1\nT = 50");
    CHECK(a.hash() != c.hash());
}

TEST_CASE("sweep determinism and csv") {
    auto cfg = parse_config(
        "graphon = constant:0.5\nfreq = cauchy:0.5\nn = 200\nK = 1.0:3.0:1.0\n"
        "T = 30\ndt = 0.05\nseeds = 2\nseed = 4");
    auto r1 = run_sweep(cfg);
    auto r2 = run_sweep(cfg);
    REQUIRE(r1.rows.size() == 3);
    for (size_t i = 0; i < r1.rows.size(); ++i) {
        CHECK(r1.rows[i].r_mean == r2.rows[i].r_mean);
        CHECK(r1.rows[i].r_std == r2.rows[i].r_std);
        CHECK(r1.rows[i].K <= (i + 1 < r1.rows.size() ? r1.rows[i + 1].K : 1e18));
    }
    CHECK(r1.kc_theory == doctest::Approx(2.0));
    CHECK(r1.floor == doctest::Approx(5.0 / std::sqrt(200.0)));

    write_sweep_csv(r1, "sweep_test.csv");
    std::string csv = slurp("sweep_test.csv");
    write_sweep_csv(r2, "sweep_test2.csv");
    CHECK(csv == slurp("sweep_test2.csv"));  // byte identical
    CHECK(csv.find("K,") != std::string::npos);
    CHECK(csv.find("# config_hash:") != std::string::npos);
    std::remove("sweep_test.csv");
    std::remove("sweep_test2.csv");
}

TEST_CASE("sweep below onset is not bracketed") {
    auto cfg = parse_config(
        "graphon = constant:0.5\nfreq = cauchy:0.5\nn = 400\nK = 0.4:1.2:0.4\n"
        "T = 60\ndt = 0.05\nseeds = 2\nseed = 9");
    auto res = run_sweep(cfg);
    CHECK(!res.kc_hat.has_value());
    for (auto& row : res.rows) CHECK(row.r_mean <= 5.0 / std::sqrt(400.0));
}

TEST_CASE("plot script") {
    auto cfg = parse_config(
        "graphon = constant:0.5\nfreq = cauchy:0.5\nn = 100\nK = 1:2:1\nT = 10\ndt = 0.05");
    auto res = run_sweep(cfg);
    emit_plot_script(res, "plot_test.gp");
    std::string s1 = slurp("plot_test.gp");
    emit_plot_script(res, "plot_test.gp");
    CHECK(s1 == slurp("plot_test.gp"));  // no timestamps
    CHECK(s1.find("sweep.csv") != std::string::npos);
    std::remove("plot_test.gp");

    SweepResult empty;
    CHECK_THROWS(emit_plot_script(empty, "plot_test.gp"));
}

TEST_CASE("compare runs and is deterministic") {
    auto cfg = parse_config(
        "graphon = small_world:0.1:0.25\nfreq = gaussian:1\nn_ladder = 100,200\n"
        "K = 1.0\nT = 4\ndt = 0.02\ndt_pde = 0.01\nseeds = 2\nseed = 6\n"
        "M = 16\nm_omega = 48\nm_x = 16");
    auto r1 = run_compare(cfg);
    auto r2 = run_compare(cfg);
    REQUIRE(r1.rows.size() == 2);
    for (size_t i = 0; i < r1.rows.size(); ++i) {
        CHECK(r1.rows[i].n == (i == 0 ? 100 : 200));
        CHECK(r1.rows[i].sup_dr_median == r2.rows[i].sup_dr_median);
        CHECK(r1.rows[i].bl_end_median == r2.rows[i].bl_end_median);
        CHECK(r1.rows[i].sup_dr_median >= 0.0);
    }
    write_compare_csv(r1, "compare_test.csv");
    CHECK(slurp("compare_test.csv").find("sup_dr") != std::string::npos);
    std::remove("compare_test.csv");
}

TEST_CASE("compare at K=0 stays at the monte-carlo floor") {
    auto cfg = parse_config(
        "graphon = constant:1\nfreq = cauchy:0.5\nn_ladder = 400\nK = 0\nT = 4\n"
        "dt = 0.02\nseeds = 2\nseed = 12\nM = 16\nm_omega = 48\nm_x = 8");
    auto rep = run_compare(cfg);
    // both sides reduce to free rotation; |dr| is pure sampling noise
    CHECK(rep.rows[0].sup_dr_median <= 2.0 * 4.0 / std::sqrt(400.0));
}

TEST_CASE("metadata block") {
    auto cfg = parse_config("graphon = constant:1\nfreq = cauchy:0.5\nn = 10\nK = 1");
    auto block = metadata_block(cfg, {{"extra_key", "extra_value"}});
    CHECK(block.find("# graphon: constant:1") != std::string::npos);
    CHECK(block.find("# extra_key: extra_value") != std::string::npos);
}
