#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "km/coupling.hpp"
#include "km/dynamics.hpp"
#include "km/frequency.hpp"
#include "km/util.hpp"

using namespace km;

namespace {
Trajectory run(const Graphon& g, int n, double K, double dt, double T,
               std::uint64_t seed, bool fast = false) {
    auto grid = make_grid(n, GridScheme::Uniform);
    auto freqs = FrequencyDistribution::cauchy(0.5).sample(n, derive_seed(seed, 1));
    auto init = sample_initial(n, InitialCondition::incoherent(), freqs, grid,
                               derive_seed(seed, 2));
    auto op = make_coupling(g, grid, fast);
    SimConfig cfg;
    cfg.K = K;
    cfg.dt = dt;
    cfg.T = T;
    cfg.record_stride = 10;
    return integrate(init, freqs, *op, cfg);
}
}  // namespace

TEST_CASE("rhs basics") {
    auto grid = make_grid(2, GridScheme::Uniform);
    WeightMatrix w;
    w.entries = Eigen::MatrixXd::Zero(2, 2);
    w.entries(0, 1) = w.entries(1, 0) = 1.0;
    OscillatorState st;
    st.phases = {0.0, pi / 2};
    std::vector<double> freqs = {0.0, 0.0};
    auto v = rhs(st, freqs, w, 1.0);
    CHECK(v[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(v[1] == doctest::Approx(-0.5).epsilon(1e-14));

    // equal phases / K=0: rhs == freqs
    st.phases = {1.0, 1.0};
    freqs = {0.3, -0.2};
    auto v2 = rhs(st, freqs, w, 2.0);
    CHECK(v2[0] == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(v2[1] == doctest::Approx(-0.2).epsilon(1e-14));
    st.phases = {0.7, 2.9};
    auto v3 = rhs(st, freqs, w, 0.0);
    CHECK(v3 == freqs);

    std::vector<double> bad = {1.0};
    CHECK_THROWS(rhs(st, bad, w, 1.0));
}

TEST_CASE("order parameter") {
    auto [r1, p1] = order_parameter({1.3, 1.3, 1.3});
    CHECK(r1 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(p1 == doctest::Approx(1.3).epsilon(1e-14));
    auto [r2, p2] = order_parameter({0.0, pi});
    CHECK(r2 < 1e-14);
    CHECK(p2 == 0.0);
    std::vector<double> roots(8);
    for (int j = 0; j < 8; ++j) roots[j] = two_pi * j / 8;
    CHECK(order_parameter(roots).first < 1e-14);
}

TEST_CASE("phase distance") {
    CHECK(phase_distance({1.0, 2.0}, {1.0, 2.0}) == 0.0);
    CHECK(phase_distance({1.5, 2.5}, {1.0, 2.0}) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(phase_distance({0.3, -0.4}, {0.0, 0.0}) ==
          doctest::Approx(0.35355339059327373).epsilon(1e-14));
    CHECK_THROWS(phase_distance({1.0}, {1.0, 2.0}));
}

TEST_CASE("initial conditions") {
    auto grid = make_grid(10000, GridScheme::Uniform);
    std::vector<double> freqs(10000, 0.0);
    auto inc = sample_initial(10000, InitialCondition::incoherent(), freqs, grid, 4);
    CHECK(order_parameter(inc.phases).first <= 0.04);
    CHECK(inc.phases ==
          sample_initial(10000, InitialCondition::incoherent(), freqs, grid, 4).phases);

    auto tight = sample_initial(10000, InitialCondition::wrapped_gaussian(1e6), freqs, grid, 4);
    CHECK(order_parameter(tight.phases).first > 0.999);

    // custom conditional density must integrate to 1 over the circle
    auto bad = InitialCondition::custom([](double, double, double) { return 1.0; });
    CHECK_THROWS(sample_initial(100, bad, freqs, grid, 4));
    auto ok = InitialCondition::custom(
        [](double th, double, double) { return (1.0 + 0.5 * std::cos(th)) / two_pi; });
    auto grid2 = make_grid(20000, GridScheme::Uniform);
    std::vector<double> freqs2(20000, 0.0);
    auto st = sample_initial(20000, ok, freqs2, grid2, 4);
    // first harmonic of that density has <cos> = 0.25
    double mc = 0;
    for (double th : st.phases) mc += std::cos(th);
    CHECK(std::abs(mc / 20000 - 0.25) < 0.02);
}

TEST_CASE("free rotation is exact") {
    int n = 50;
    auto grid = make_grid(n, GridScheme::Uniform);
    auto freqs = FrequencyDistribution::gaussian(1.0).sample(n, 3);
    auto init = sample_initial(n, InitialCondition::incoherent(), freqs, grid, 7);
    auto w = build_weighted_graph(Graphon::constant(1.0), grid);
    auto op = make_dense_serial(w);
    SimConfig cfg;
    cfg.K = 0.0;
    cfg.T = 10.0;
    auto traj = integrate(init, freqs, *op, cfg);
    for (int i = 0; i < n; ++i) {
        double expect = std::fmod(init.phases[i] + freqs[i] * 10.0, two_pi);
        if (expect < 0) expect += two_pi;
        double d = std::abs(traj.final_state.phases[i] - expect);
        d = std::min(d, two_pi - d);
        CHECK(d < 1e-10);
    }
}

TEST_CASE("two-oscillator phase locking") {
    // sin(d) = 2w/K at the fixed point
    auto grid = make_grid(2, GridScheme::Uniform);
    std::vector<double> freqs = {-0.1, 0.1};
    OscillatorState init;
    init.phases = {0.1, 0.2};
    auto w = build_weighted_graph(Graphon::constant(1.0), grid);
    auto op = make_dense_serial(w);
    SimConfig cfg;
    cfg.K = 1.0;
    cfg.T = 100.0;
    auto traj = integrate(init, freqs, *op, cfg);
    double d = traj.final_state.phases[1] - traj.final_state.phases[0];
    CHECK(std::abs(std::sin(d) - 0.2) < 1e-6);
}

TEST_CASE("rk4 order") {
    // halving dt shrinks the error vs a fine reference by ~16
    auto base = run(Graphon::small_world(0.1, 0.25), 64, 1.5, 0.001, 2.0, 11);
    auto coarse = run(Graphon::small_world(0.1, 0.25), 64, 1.5, 0.02, 2.0, 11);
    auto fine = run(Graphon::small_world(0.1, 0.25), 64, 1.5, 0.01, 2.0, 11);
    double e1 = phase_distance(coarse.final_state.phases, base.final_state.phases);
    double e2 = phase_distance(fine.final_state.phases, base.final_state.phases);
    CHECK(e1 / e2 >= 12.0);
}

TEST_CASE("translation equivariance") {
    int n = 40;
    auto grid = make_grid(n, GridScheme::Uniform);
    auto freqs = FrequencyDistribution::cauchy(0.5).sample(n, 13);
    auto init = sample_initial(n, InitialCondition::incoherent(), freqs, grid, 17);
    auto shifted = init;
    for (auto& th : shifted.phases) th = std::fmod(th + 1.0, two_pi);
    auto w = build_weighted_graph(Graphon::small_world(0.1, 0.25), grid);
    auto op = make_dense_serial(w);
    SimConfig cfg;
    cfg.K = 1.0;
    cfg.T = 5.0;
    auto ta = integrate(init, freqs, *op, cfg);
    auto tb = integrate(shifted, freqs, *op, cfg);
    for (auto& rec : ta.records) (void)rec;
    for (size_t k = 0; k < ta.records.size(); ++k)
        CHECK(std::abs(ta.records[k].r - tb.records[k].r) < 1e-10);
    for (int i = 0; i < n; ++i) {
        double d = tb.final_state.phases[i] - ta.final_state.phases[i] - 1.0;
        d = std::remainder(d, two_pi);
        CHECK(std::abs(d) < 1e-10);
    }
}

TEST_CASE("coupling kernels agree") {
    int n = 300;
    auto grid = make_grid(n, GridScheme::Uniform);
    Rng rng(23);
    std::vector<double> s(n), c(n);
    for (int i = 0; i < n; ++i) {
        double th = rng.uniform(0.0, two_pi);
        s[i] = std::sin(th);
        c[i] = std::cos(th);
    }
    // band radii chosen so no grid distance k/n ties r exactly: at a tie the
    // dense path is at the mercy of rounding in (i+1)/n while the fast path
    // applies the jump-midpoint convention in exact arithmetic
    for (auto g : {Graphon::constant(0.5), Graphon::small_world(0.1, 0.2503),
                   Graphon::ring_indicator(0.2003)}) {
        auto w = build_weighted_graph(g, grid);
        auto serial = make_dense_serial(w);
        auto blocked = make_dense_parallel(w);
        auto fast = make_coupling(g, grid, true);
        std::vector<double> S0(n), C0(n), S1(n), C1(n), S2(n), C2(n);
        serial->accumulate(s.data(), c.data(), S0.data(), C0.data());
        blocked->accumulate(s.data(), c.data(), S1.data(), C1.data());
        fast->accumulate(s.data(), c.data(), S2.data(), C2.data());
        for (int i = 0; i < n; ++i) {
            CHECK(std::abs(S1[i] - S0[i]) < 1e-10);
            CHECK(std::abs(C1[i] - C0[i]) < 1e-10);
            CHECK(std::abs(S2[i] - S0[i]) < 1e-10);
            CHECK(std::abs(C2[i] - C0[i]) < 1e-10);
        }
    }
}

TEST_CASE("ring band tie convention") {
    // at grid distances exactly equal to r the band kernel applies the
    // jump-midpoint value 0.5*(inside + outside)
    int n = 20;
    auto grid = make_grid(n, GridScheme::Uniform);
    auto g = Graphon::small_world(0.1, 0.2);  // tie at offset 4
    auto fast = make_coupling(g, grid, true);
    CHECK(fast->name() == "ring_band");
    std::vector<double> e(n, 0.0), S(n), C(n);
    e[10] = 1.0;
    fast->accumulate(e.data(), e.data(), S.data(), C.data());
    CHECK(S[6] == doctest::Approx(0.5).epsilon(1e-14));   // offset 4: the tie
    CHECK(S[14] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(S[7] == doctest::Approx(0.9).epsilon(1e-14));   // offset 3: inside
    CHECK(S[15] == doctest::Approx(0.1).epsilon(1e-14));  // offset 5: outside
}

TEST_CASE("compare_couplings") {
    int n = 200;
    auto grid = make_grid(n, GridScheme::Uniform);
    auto freqs = FrequencyDistribution::cauchy(0.5).sample(n, 31);
    auto init = sample_initial(n, InitialCondition::incoherent(), freqs, grid, 37);
    auto w = build_weighted_graph(Graphon::small_world(0.1, 0.25), grid);
    SimConfig cfg;
    cfg.K = 1.0;
    cfg.T = 10.0;
    cfg.record_stride = 10;

    // identical matrices: zero within roundoff
    auto same = compare_couplings(w, w, init, freqs, cfg);
    CHECK(same.sup_distance < 1e-12);
    CHECK(same.coupling_gap == 0.0);

    // linear-in-eta response to a uniform perturbation
    double prev_ratio = -1;
    for (double eta : {0.01, 0.02, 0.04}) {
        WeightMatrix wp;
        wp.entries = (w.entries.array() + eta).matrix();
        auto res = compare_couplings(w, wp, init, freqs, cfg);
        CHECK(res.coupling_gap == doctest::Approx(eta).epsilon(1e-12));
        double ratio = res.sup_distance / eta;
        if (prev_ratio > 0) CHECK(std::abs(ratio - prev_ratio) < 0.5 * prev_ratio);
        prev_ratio = ratio;
    }
}

TEST_CASE("steady_r and subcritical floor") {
    // classical cauchy below onset: time-averaged r stays at the n^{-1/2} scale
    auto traj = run(Graphon::constant(1.0), 2000, 0.7, 0.05, 60.0, 41, true);
    double tail = 0;
    int cnt = 0;
    for (auto& rec : traj.records)
        if (rec.t > 30.0) {
            tail += rec.r;
            ++cnt;
        }
    CHECK(tail / cnt <= 3.0 / std::sqrt(2000.0));
}
