#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "km/frequency.hpp"
#include "km/util.hpp"

using namespace km;

namespace {
double psi_quad(const Quadrature& q, double x) {
    double acc = 0;
    for (std::size_t j = 0; j < q.size(); ++j)
        acc += q.weights[j] * x / (x * x + q.nodes[j] * q.nodes[j]);
    return acc;
}
}  // namespace

TEST_CASE("densities") {
    auto ca = FrequencyDistribution::cauchy(0.5);
    CHECK(ca.density(0.0) == doctest::Approx(1.0 / (0.5 * pi)).epsilon(1e-15));
    CHECK(ca.g0() == ca.density(0.0));
    auto ga = FrequencyDistribution::gaussian(1.0);
    CHECK(ga.density(0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-14));
    CHECK(ca.density(-1.3) == ca.density(1.3));
    CHECK(ga.density(-1.3) == ga.density(1.3));
    CHECK(ca.assumptions_met());
    CHECK(ga.assumptions_met());
    CHECK_THROWS_AS(FrequencyDistribution::cauchy(-1.0), ConfigError);
}

TEST_CASE("sampling") {
    auto ga = FrequencyDistribution::gaussian(1.0);
    auto v = ga.sample(10000, 5);
    CHECK(v == ga.sample(10000, 5));
    double mean = 0;
    for (double w : v) mean += w;
    CHECK(std::abs(mean / v.size()) < 0.04);

    auto ca = FrequencyDistribution::cauchy(0.5);
    auto c = ca.sample(10000, 5);
    std::nth_element(c.begin(), c.begin() + 5000, c.end());
    CHECK(std::abs(c[5000]) < 0.025);  // median concentrates; the mean does not exist
}

TEST_CASE("quadrature moments") {
    auto ga = FrequencyDistribution::gaussian(1.0);
    auto q = ga.quadrature(80);
    REQUIRE(q.size() == 80);
    double sw = 0, sm = 0;
    for (std::size_t j = 0; j < q.size(); ++j) {
        sw += q.weights[j];
        sm += q.weights[j] * q.nodes[j];
    }
    CHECK(std::abs(sw - 1.0) < 1e-10);
    CHECK(std::abs(sm) < 1e-10);

    auto ca = FrequencyDistribution::cauchy(0.5);
    auto qc = ca.quadrature(200);
    REQUIRE(qc.size() == 200);
    sw = 0;
    sm = 0;
    for (std::size_t j = 0; j < qc.size(); ++j) {
        sw += qc.weights[j];
        sm += qc.weights[j] * qc.nodes[j];
    }
    CHECK(std::abs(sw - 1.0) < 1e-10);
    CHECK(std::abs(sm) < 1e-10);

    CHECK_THROWS(ca.quadrature(1));
}

TEST_CASE("cauchy resolvent integral oracle") {
    // int x/(x^2+w^2) g dw = 1/(x+delta) in closed form
    auto ca = FrequencyDistribution::cauchy(0.5);
    auto q = ca.quadrature(200);
    CHECK(std::abs(psi_quad(q, 0.7) - 1.0 / 1.2) < 1e-6);
    for (double x = 0.05; x <= 10.0; x *= 1.35)
        CHECK(std::abs(psi_quad(q, x) - 1.0 / (x + 0.5)) < 1e-6);
}

TEST_CASE("poisson kernel limit on the reference rule") {
    // x -> 0+ limit of the resolvent integrand is pi*g(0)
    for (auto dist : {FrequencyDistribution::cauchy(0.5), FrequencyDistribution::gaussian(1.0)}) {
        double v = psi_quad(dist.reference_rule(), 1e-3);
        CHECK(std::abs(v - pi * dist.g0()) < 0.01 * pi * dist.g0());
    }
}

TEST_CASE("custom distributions") {
    // triangular density on [-1, 1]
    auto tri = FrequencyDistribution::custom(
        [](double w) { return std::abs(w) < 1.0 ? 1.0 - std::abs(w) : 0.0; });
    CHECK(tri.assumptions_met());
    CHECK(tri.g0() == 1.0);
    CHECK_THROWS_AS(tri.sample(10, 1), UnsupportedError);
    auto q = tri.quadrature(200);
    double sw = 0;
    for (double w : q.weights) sw += w;
    CHECK(std::abs(sw - 1.0) < 1e-8);

    // increasing on R+: assumptions probe must reject
    auto bad = FrequencyDistribution::custom(
        [](double w) { return std::abs(w) < 2.0 ? 0.1 + 0.2 * std::abs(w) : 0.0; });
    CHECK(!bad.assumptions_met());

    // asymmetric: rejected too
    auto skew = FrequencyDistribution::custom(
        [](double w) { return w > 0 && w < 1 ? 1.0 : 0.0; });
    CHECK(!skew.assumptions_met());
}

TEST_CASE("parse") {
    CHECK(FrequencyDistribution::parse("cauchy:0.5").param() == 0.5);
    CHECK(FrequencyDistribution::parse("gaussian:1").kind() == FreqKind::Gaussian);
    CHECK_THROWS_AS(FrequencyDistribution::parse("lorentz:0.5"), ConfigError);
    CHECK_THROWS_AS(FrequencyDistribution::parse("cauchy"), ConfigError);
    CHECK_THROWS_AS(FrequencyDistribution::parse("cauchy:abc"), ConfigError);
}
