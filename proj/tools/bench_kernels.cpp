// Micro-benchmark comparing the coupling kernels: dense serial reference,
// blocked/threaded dense, and the O(n) structured fast paths.  Also checks
// that every kernel agrees with the serial reference.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "km/coupling.hpp"
#include "km/graphon.hpp"
#include "km/util.hpp"

using namespace km;

namespace {

double time_ms(const CouplingOp& op, const std::vector<double>& s,
               const std::vector<double>& c, int reps) {
    const int n = op.n();
    std::vector<double> S(n), C(n);
    op.accumulate(s.data(), c.data(), S.data(), C.data());  // warm-up
    auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r)
        op.accumulate(s.data(), c.data(), S.data(), C.data());
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

double max_gap(const CouplingOp& a, const CouplingOp& b, const std::vector<double>& s,
               const std::vector<double>& c) {
    const int n = a.n();
    std::vector<double> Sa(n), Ca(n), Sb(n), Cb(n);
    a.accumulate(s.data(), c.data(), Sa.data(), Ca.data());
    b.accumulate(s.data(), c.data(), Sb.data(), Cb.data());
    double g = 0.0;
    for (int i = 0; i < n; ++i)
        g = std::max({g, std::abs(Sa[i] - Sb[i]), std::abs(Ca[i] - Cb[i])});
    return g;
}

void bench_graphon(const Graphon& g, int n, int reps) {
    NodeGrid grid = make_grid(n, GridScheme::Uniform, 0);
    WeightMatrix w = build_weighted_graph(g, grid);

    std::vector<std::unique_ptr<CouplingOp>> ops;
    ops.push_back(make_dense_serial(w));
    ops.push_back(make_dense_parallel(w));
    auto fast = make_coupling(g, grid, true);
    if (fast->name() != "dense_blocked") ops.push_back(std::move(fast));

    Rng rng(42);
    std::vector<double> th(n), s(n), c(n);
    for (int i = 0; i < n; ++i) {
        th[i] = rng.uniform(0.0, two_pi);
        s[i] = std::sin(th[i]);
        c[i] = std::cos(th[i]);
    }

    std::printf("%s  n=%d\n", g.spec().c_str(), n);
    const CouplingOp& ref = *ops[0];
    for (const auto& op : ops) {
        double ms = time_ms(*op, s, c, reps);
        double gap = max_gap(ref, *op, s, c);
        std::printf("  %-14s %10.4f ms/apply   max|diff vs serial| = %.3e\n",
                    op->name().c_str(), ms, gap);
    }
}

}  // namespace

int main() {
    for (int n : {1000, 4000}) {
        bench_graphon(Graphon::constant(0.5), n, 5);
        bench_graphon(Graphon::small_world(0.1, 0.2503), n, 5);
    }
    return 0;
}
