#include "km/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "km/util.hpp"

namespace km {

namespace {

double wrap(double th) {
    th = std::fmod(th, two_pi);
    return th < 0.0 ? th + two_pi : th;
}

// velocity field on raw (possibly unwrapped) phases
void eval_rhs(const std::vector<double>& theta, const std::vector<double>& freqs,
              const CouplingOp& coupling, double K, std::vector<double>& scratch_s,
              std::vector<double>& scratch_c, std::vector<double>& out) {
    const int n = (int)theta.size();
    std::vector<double>&s = scratch_s, &c = scratch_c;
    for (int i = 0; i < n; ++i) {
        s[i] = std::sin(theta[i]);
        c[i] = std::cos(theta[i]);
    }
    static thread_local std::vector<double> S, C;
    S.resize(n);
    C.resize(n);
    coupling.accumulate(s.data(), c.data(), S.data(), C.data());
    const double kn = K / n;
    for (int i = 0; i < n; ++i)
        out[i] = freqs[i] + kn * (S[i] * c[i] - C[i] * s[i]);
}

// one classical RK4 step in place
struct Rk4Work {
    std::vector<double> s, c, k1, k2, k3, k4, tmp;
    explicit Rk4Work(int n)
        : s(n), c(n), k1(n), k2(n), k3(n), k4(n), tmp(n) {}
};

void rk4_step(std::vector<double>& theta, const std::vector<double>& freqs,
              const CouplingOp& coupling, double K, double dt, Rk4Work& w) {
    const int n = (int)theta.size();
    eval_rhs(theta, freqs, coupling, K, w.s, w.c, w.k1);
    for (int i = 0; i < n; ++i) w.tmp[i] = theta[i] + 0.5 * dt * w.k1[i];
    eval_rhs(w.tmp, freqs, coupling, K, w.s, w.c, w.k2);
    for (int i = 0; i < n; ++i) w.tmp[i] = theta[i] + 0.5 * dt * w.k2[i];
    eval_rhs(w.tmp, freqs, coupling, K, w.s, w.c, w.k3);
    for (int i = 0; i < n; ++i) w.tmp[i] = theta[i] + dt * w.k3[i];
    eval_rhs(w.tmp, freqs, coupling, K, w.s, w.c, w.k4);
    const double h6 = dt / 6.0;
    for (int i = 0; i < n; ++i)
        theta[i] += h6 * (w.k1[i] + 2.0 * w.k2[i] + 2.0 * w.k3[i] + w.k4[i]);
}

}  // namespace

void SimConfig::validate() const {
    if (!(dt > 0.0) || dt > 0.1)
        throw ConfigError("dt must lie in (0, 0.1]; got " + std::to_string(dt));
    if (!(T > 0.0)) throw ConfigError("horizon T must be positive");
    if (record_stride < 1) throw ConfigError("record_stride must be >= 1");
    if (!std::isfinite(K)) throw ConfigError("coupling K must be finite");
}

InitialCondition InitialCondition::incoherent() { return {}; }

InitialCondition InitialCondition::wrapped_gaussian(double concentration) {
    if (!(concentration > 0.0)) throw ConfigError("concentration must be positive");
    InitialCondition ic;
    ic.kind = Kind::WrappedGaussian;
    ic.concentration = concentration;
    return ic;
}

InitialCondition InitialCondition::custom(
    std::function<double(double, double, double)> density) {
    if (!density) throw ConfigError("custom initial condition needs a density");
    InitialCondition ic;
    ic.kind = Kind::Custom;
    ic.density = std::move(density);
    return ic;
}

OscillatorState sample_initial(int n, const InitialCondition& ic,
                               const std::vector<double>& freqs,
                               const NodeGrid& grid, std::uint64_t seed) {
    if ((int)freqs.size() != n || (int)grid.size() != n)
        throw std::invalid_argument("sample_initial: length mismatch");
    OscillatorState st;
    st.phases.resize(n);
    Rng rng(seed);
    switch (ic.kind) {
        case InitialCondition::Kind::Incoherent:
            for (int i = 0; i < n; ++i) st.phases[i] = rng.uniform(0.0, two_pi);
            break;
        case InitialCondition::Kind::WrappedGaussian: {
            const double sd = 1.0 / std::sqrt(ic.concentration);
            for (int i = 0; i < n; ++i) st.phases[i] = wrap(sd * rng.normal());
            break;
        }
        case InitialCondition::Kind::Custom: {
            // normalization probe on a few representative (omega, xi) pairs
            for (int probe = 0; probe < std::min(n, 4); ++probe) {
                int i = probe * (n - 1) / std::max(1, std::min(n, 4) - 1);
                double mass = 0.0;
                const int m = 512;
                for (int j = 0; j < m; ++j)
                    mass += ic.density(two_pi * (j + 0.5) / m, freqs[i], grid.points[i]);
                mass *= two_pi / m;
                if (std::abs(mass - 1.0) > 1e-3)
                    throw std::invalid_argument(
                        "initial density does not integrate to 1 over the circle");
            }
            for (int i = 0; i < n; ++i) {
                // rejection sampling against a scanned envelope
                double bound = 0.0;
                for (int j = 0; j < 256; ++j)
                    bound = std::max(
                        bound, ic.density(two_pi * (j + 0.5) / 256, freqs[i], grid.points[i]));
                bound *= 1.2;
                for (int tries = 0; tries < 100000; ++tries) {
                    double th = rng.uniform(0.0, two_pi);
                    if (rng.uniform() * bound <= ic.density(th, freqs[i], grid.points[i])) {
                        st.phases[i] = th;
                        break;
                    }
                    if (tries == 99999)
                        throw NumericalError("rejection sampling failed to accept");
                }
            }
            break;
        }
    }
    return st;
}

std::vector<double> rhs(const OscillatorState& state, const std::vector<double>& freqs,
                        const CouplingOp& coupling, double K) {
    const int n = state.n();
    if ((int)freqs.size() != n || coupling.n() != n)
        throw std::invalid_argument("rhs: dimension mismatch");
    std::vector<double> s(n), c(n), out(n);
    eval_rhs(state.phases, freqs, coupling, K, s, c, out);
    return out;
}

std::vector<double> rhs(const OscillatorState& state, const std::vector<double>& freqs,
                        const WeightMatrix& w, double K) {
    return rhs(state, freqs, *make_dense_serial(w), K);
}

std::vector<double> rhs(const OscillatorState& state, const std::vector<double>& freqs,
                        const AdjacencyMatrix& a, double K) {
    return rhs(state, freqs, *make_adjacency(a), K);
}

Trajectory integrate(const OscillatorState& init, const std::vector<double>& freqs,
                     const CouplingOp& coupling, const SimConfig& cfg,
                     bool keep_phases) {
    cfg.validate();
    const int n = init.n();
    if ((int)freqs.size() != n || coupling.n() != n)
        throw std::invalid_argument("integrate: dimension mismatch");

    std::vector<double> theta = init.phases;  // raw; wrapped only on output
    Rk4Work work(n);
    const long steps = std::lround(cfg.T / cfg.dt);

    Trajectory traj;
    auto record = [&](long step) {
        TrajectoryRecord rec;
        rec.t = init.time + step * cfg.dt;
        std::vector<double> wrapped(n);
        for (int i = 0; i < n; ++i) wrapped[i] = wrap(theta[i]);
        auto [r, psi] = order_parameter(wrapped);
        rec.r = r;
        rec.psi = psi;
        if (keep_phases) rec.phases = std::move(wrapped);
        traj.records.push_back(std::move(rec));
    };

    record(0);
    for (long step = 1; step <= steps; ++step) {
        rk4_step(theta, freqs, coupling, cfg.K, cfg.dt, work);
        if (!std::isfinite(theta[0]))
            throw NumericalError("integrate: non-finite phase at t=" +
                                 std::to_string(init.time + step * cfg.dt));
        if (step % cfg.record_stride == 0 || step == steps) record(step);
    }

    traj.final_state.time = init.time + steps * cfg.dt;
    traj.final_state.phases.resize(n);
    for (int i = 0; i < n; ++i) traj.final_state.phases[i] = wrap(theta[i]);
    return traj;
}

std::pair<double, double> order_parameter(const std::vector<double>& phases) {
    if (phases.empty()) throw std::invalid_argument("order_parameter: empty state");
    double re = 0.0, im = 0.0;
    for (double th : phases) {
        re += std::cos(th);
        im += std::sin(th);
    }
    re /= (double)phases.size();
    im /= (double)phases.size();
    double r = std::hypot(re, im);
    double psi = r < 1e-14 ? 0.0 : wrap(std::atan2(im, re));
    return {r, psi};
}

double phase_distance(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("phase_distance: length mismatch");
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s / (double)a.size());
}

double steady_r(const Trajectory& traj, double tail_fraction) {
    const size_t m = traj.records.size();
    if (m == 0) throw std::invalid_argument("steady_r: empty trajectory");
    size_t start = (size_t)((1.0 - tail_fraction) * m);
    if (start >= m) start = m - 1;
    double s = 0.0;
    for (size_t i = start; i < m; ++i) s += traj.records[i].r;
    return s / (double)(m - start);
}

CompareResult compare_couplings(const CouplingOp& a, const CouplingOp& b,
                                double coupling_gap, const OscillatorState& init,
                                const std::vector<double>& freqs,
                                const SimConfig& cfg) {
    cfg.validate();
    const int n = init.n();
    if (a.n() != n || b.n() != n || (int)freqs.size() != n)
        throw std::invalid_argument("compare_couplings: dimension mismatch");

    std::vector<double> ta = init.phases, tb = init.phases;
    Rk4Work wa(n), wb(n);
    const long steps = std::lround(cfg.T / cfg.dt);
    double sup = 0.0;
    for (long step = 1; step <= steps; ++step) {
        rk4_step(ta, freqs, a, cfg.K, cfg.dt, wa);
        rk4_step(tb, freqs, b, cfg.K, cfg.dt, wb);
        if (step % cfg.record_stride == 0 || step == steps)
            sup = std::max(sup, phase_distance(ta, tb));
    }
    return {sup, coupling_gap};
}

CompareResult compare_couplings(const WeightMatrix& a, const WeightMatrix& b,
                                const OscillatorState& init,
                                const std::vector<double>& freqs,
                                const SimConfig& cfg) {
    WeightMatrix diff{a.entries - b.entries};
    return compare_couplings(*make_dense_parallel(a), *make_dense_parallel(b),
                             norm_2n(diff.entries), init, freqs, cfg);
}

CompareResult compare_couplings(const WeightMatrix& a, const AdjacencyMatrix& b,
                                const OscillatorState& init,
                                const std::vector<double>& freqs,
                                const SimConfig& cfg) {
    const int n = b.n;
    Eigen::MatrixXd bd(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) bd(i, j) = (double)b.at(i, j);
    WeightMatrix diff{a.entries - bd};
    return compare_couplings(*make_dense_parallel(a), *make_adjacency(b),
                             norm_2n(diff.entries), init, freqs, cfg);
}

}  // namespace km
