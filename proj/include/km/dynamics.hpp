#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "km/coupling.hpp"
#include "km/graphon.hpp"

namespace km {

// Phases live in [0, 2pi); integration keeps unwrapped copies internally.
struct OscillatorState {
    std::vector<double> phases;
    double time = 0.0;
    int n() const { return (int)phases.size(); }
};

struct SimConfig {
    double K = 1.0;
    double dt = 0.01;
    double T = 100.0;
    int record_stride = 1;
    std::uint64_t seed = 0;
    void validate() const;  // dt in (0, 0.1], T > 0, stride >= 1
};

struct InitialCondition {
    enum class Kind { Incoherent, WrappedGaussian, Custom };
    Kind kind = Kind::Incoherent;
    double concentration = 1.0;  // wrapped gaussian: variance 1/concentration
    // custom conditional density rho0(theta, omega, xi); must integrate to 1
    // over the circle for every (omega, xi)
    std::function<double(double, double, double)> density;

    static InitialCondition incoherent();
    static InitialCondition wrapped_gaussian(double concentration);
    static InitialCondition custom(std::function<double(double, double, double)> density);
};

OscillatorState sample_initial(int n, const InitialCondition& ic,
                               const std::vector<double>& freqs,
                               const NodeGrid& grid, std::uint64_t seed);

// d theta_i / dt = omega_i + (K/n) sum_j W_ij sin(theta_j - theta_i)
std::vector<double> rhs(const OscillatorState& state, const std::vector<double>& freqs,
                        const CouplingOp& coupling, double K);
std::vector<double> rhs(const OscillatorState& state, const std::vector<double>& freqs,
                        const WeightMatrix& w, double K);
std::vector<double> rhs(const OscillatorState& state, const std::vector<double>& freqs,
                        const AdjacencyMatrix& a, double K);

struct TrajectoryRecord {
    double t;
    double r;
    double psi;
    std::vector<double> phases;  // wrapped; empty unless keep_phases
};

struct Trajectory {
    std::vector<TrajectoryRecord> records;
    OscillatorState final_state;  // wrapped
};

Trajectory integrate(const OscillatorState& init, const std::vector<double>& freqs,
                     const CouplingOp& coupling, const SimConfig& cfg,
                     bool keep_phases = false);

// (r, psi) of the mean phasor; psi = 0 when r < 1e-14
std::pair<double, double> order_parameter(const std::vector<double>& phases);

// sqrt(n^-1 sum (theta_i - theta'_i)^2) on plain real representatives
double phase_distance(const std::vector<double>& a, const std::vector<double>& b);

// Mean of r(t) over the trailing fraction of records (steady-state proxy).
double steady_r(const Trajectory& traj, double tail_fraction = 0.2);

struct CompareResult {
    double sup_distance;  // max over recorded times of phase_distance
    double coupling_gap;  // norm_2n of the coupling-matrix difference
};

// Runs the two systems in lockstep from identical initial data (unwrapped
// phases throughout, so the distance is the plain vector norm).
CompareResult compare_couplings(const CouplingOp& a, const CouplingOp& b,
                                double coupling_gap, const OscillatorState& init,
                                const std::vector<double>& freqs, const SimConfig& cfg);
CompareResult compare_couplings(const WeightMatrix& a, const WeightMatrix& b,
                                const OscillatorState& init,
                                const std::vector<double>& freqs, const SimConfig& cfg);
CompareResult compare_couplings(const WeightMatrix& a, const AdjacencyMatrix& b,
                                const OscillatorState& init,
                                const std::vector<double>& freqs, const SimConfig& cfg);

}  // namespace km
