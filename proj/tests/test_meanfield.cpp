#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "km/meanfield.hpp"
#include "km/spectra.hpp"
#include "km/util.hpp"

using namespace km;

TEST_CASE("init invariants") {
    auto ca = FrequencyDistribution::cauchy(0.5);
    auto inc = init_meanfield(InitialCondition::incoherent(), ca, 8, 32, 8);
    CHECK(inc.coeffs[0].real().maxCoeff() == doctest::Approx(1.0 / two_pi).epsilon(1e-15));
    for (int k = 1; k <= 8; ++k) CHECK(inc.coeffs[k].cwiseAbs().maxCoeff() == 0.0);
    CHECK(meanfield_r(inc) == 0.0);

    auto wg = init_meanfield(InitialCondition::wrapped_gaussian(2.0), ca, 8, 32, 8);
    for (int k = 2; k <= 8; ++k)
        CHECK(wg.coeffs[k].cwiseAbs().maxCoeff() < wg.coeffs[k - 1].cwiseAbs().minCoeff());

    // density reconstruction at 64 theta points integrates to 1 everywhere
    for (int j = 0; j < wg.m_omega(); ++j)
        for (int l = 0; l < wg.m_x; ++l) {
            double mass = 0;
            for (int t = 0; t < 64; ++t) {
                double th = two_pi * t / 64;
                std::complex<double> v = wg.coeffs[0](j, l);
                for (int k = 1; k <= 8; ++k)
                    v += wg.coeffs[k](j, l) * std::exp(std::complex<double>(0, -k * th)) +
                         std::conj(wg.coeffs[k](j, l)) * std::exp(std::complex<double>(0, k * th));
                mass += v.real() * two_pi / 64;
            }
            CHECK(std::abs(mass - 1.0) < 1e-8);
        }

    auto bad = InitialCondition::custom([](double, double, double) { return 0.5; });
    CHECK_THROWS(init_meanfield(bad, ca, 8, 32, 8));
}

TEST_CASE("incoherent state is steady") {
    auto ca = FrequencyDistribution::cauchy(0.5);
    auto g = Graphon::small_world(0.1, 0.25);
    auto st = init_meanfield(InitialCondition::incoherent(), ca, 16, 64, 16);
    auto traj = evolve(st, ca, g, 2.0, 0.01, 10.0);
    double drift = 0;
    for (int k = 0; k <= 16; ++k)
        drift = std::max(drift,
                         (traj.final_state.coeffs[k] - st.coeffs[k]).cwiseAbs().maxCoeff());
    CHECK(drift <= 1e-12);
}

TEST_CASE("K=0 is exact rotation") {
    auto ca = FrequencyDistribution::cauchy(0.5);
    auto g = Graphon::constant(1.0);
    auto st = init_meanfield(InitialCondition::wrapped_gaussian(1.0), ca, 8, 32, 8);
    auto traj = evolve(st, ca, g, 0.0, 0.01, 5.0);
    for (int k = 1; k <= 8; ++k) {
        double drift = (traj.final_state.coeffs[k].cwiseAbs() - st.coeffs[k].cwiseAbs())
                           .cwiseAbs()
                           .maxCoeff();
        CHECK(drift < 1e-10);
    }
}

TEST_CASE("classical supercritical saturation") {
    // r grows from a small coherent seed and saturates at sqrt(1 - Kc/K)
    auto ca = FrequencyDistribution::cauchy(0.5);
    auto g = Graphon::constant(1.0);
    auto st = init_meanfield(InitialCondition::wrapped_gaussian(0.05), ca, 64, 320, 8);
    auto traj = evolve(st, ca, g, 2.0, 0.01, 26.0, 100);
    double r_end = traj.r.back();
    CHECK(std::abs(r_end - std::sqrt(0.5)) < 0.02);
    // and it grew on the way
    CHECK(traj.r.front() < 0.05);
}

TEST_CASE("galerkin truncation convergence") {
    auto ca = FrequencyDistribution::cauchy(0.5);
    auto g = Graphon::constant(1.0);
    auto a = init_meanfield(InitialCondition::wrapped_gaussian(0.05), ca, 32, 160, 8);
    auto b = init_meanfield(InitialCondition::wrapped_gaussian(0.05), ca, 64, 160, 8);
    auto ta = evolve(a, ca, g, 2.0, 0.01, 20.0, 50);
    auto tb = evolve(b, ca, g, 2.0, 0.01, 20.0, 50);
    double sup = 0;
    for (size_t i = 0; i < ta.r.size(); ++i)
        sup = std::max(sup, std::abs(ta.r[i] - tb.r[i]));
    CHECK(sup <= 1e-3);
}

TEST_CASE("linearized growth rates") {
    auto ca = FrequencyDistribution::cauchy(0.5);
    auto g = Graphon::constant(1.0);
    Eigen::MatrixXcd z = Eigen::MatrixXcd::Constant(200, 8, 0.01);
    CHECK(std::abs(linearized_evolve(z, ca, g, 2.0, 0.01, 20.0) - 0.5) < 1e-2);
    CHECK(linearized_evolve(z, ca, g, 0.5, 0.01, 20.0) <= 1e-2);

    auto ga = FrequencyDistribution::gaussian(1.0);
    auto sw = Graphon::small_world(0.1, 0.25);
    auto tp = transition_points(analytic_spectrum(sw), ga);
    double K = 1.1 * tp.kc_plus;
    Rng rng(7);
    Eigen::MatrixXcd z2(160, 32);
    for (int i = 0; i < 160; ++i)
        for (int j = 0; j < 32; ++j)
            z2(i, j) = std::complex<double>(rng.normal(), rng.normal()) * 0.01;
    double rate = linearized_evolve(z2, ga, sw, K, 0.01, 30.0);
    double oracle = *solve_eigenvalue(ga, *analytic_spectrum(sw).zeta_max, K);
    CHECK(std::abs(rate - oracle) < 0.1 * oracle);

    CHECK_THROWS(linearized_evolve(Eigen::MatrixXcd::Zero(8, 8), ca, g, 1.0, 0.01, 1.0));
}

TEST_CASE("stability classification") {
    auto ca = FrequencyDistribution::cauchy(0.5);
    auto g = Graphon::constant(1.0);
    CHECK(stability_classify(g, ca, 0.5) == Stability::Stable);
    CHECK(stability_classify(g, ca, 1.5) == Stability::UnstablePositiveBranch);
    CHECK(stability_classify(g, ca, -100.0) == Stability::Stable);  // kc_minus = -inf

    auto ga = FrequencyDistribution::gaussian(1.0);
    auto sw = Graphon::small_world(0.1, 0.25);
    CHECK(stability_classify(sw, ga, -15.0) == Stability::Stable);
    CHECK(stability_classify(sw, ga, -25.0) == Stability::UnstableNegativeBranch);

    auto bumps = FrequencyDistribution::custom(
        [](double w) { return std::exp(-0.5 * (std::abs(w) - 2) * (std::abs(w) - 2)); });
    CHECK_THROWS(stability_classify(g, bumps, 1.0));
}

TEST_CASE("bl distance proxy") {
    auto ca = FrequencyDistribution::cauchy(0.5);
    auto st = init_meanfield(InitialCondition::incoherent(), ca, 8, 64, 8);

    // samples drawn from the matching product measure
    Rng rng(3);
    std::vector<PhasePoint> samples(10000);
    auto freqs = ca.sample(10000, 11);
    for (int i = 0; i < 10000; ++i)
        samples[i] = {rng.uniform(0.0, two_pi), freqs[i], rng.uniform()};
    CHECK(bl_distance_proxy(samples, st) <= 0.05);

    // identical sample sets: exactly zero
    CHECK(bl_distance_proxy(samples, samples) == 0.0);

    // a point mass is separated from the uniform state
    std::vector<PhasePoint> mass(100, PhasePoint{1.0, 0.0, 0.5});
    CHECK(bl_distance_proxy(mass, st) >= 0.2);
}

TEST_CASE("checkpoint round trip") {
    auto ca = FrequencyDistribution::cauchy(0.5);
    auto st = init_meanfield(InitialCondition::wrapped_gaussian(0.3), ca, 6, 32, 8);
    st.time = 3.25;
    std::string path = "checkpoint_test.bin";
    save_checkpoint(st, path);
    auto back = load_checkpoint(path);
    std::remove(path.c_str());
    CHECK(back.M == st.M);
    CHECK(back.m_x == st.m_x);
    CHECK(back.time == st.time);
    CHECK(back.omega.nodes == st.omega.nodes);
    for (int k = 0; k <= 6; ++k)
        CHECK((back.coeffs[k] - st.coeffs[k]).cwiseAbs().maxCoeff() == 0.0);
}
