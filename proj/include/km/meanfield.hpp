#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <string>
#include <vector>

#include "km/dynamics.hpp"
#include "km/frequency.hpp"
#include "km/graphon.hpp"
#include "km/quadrature.hpp"

namespace km {

// Fourier-Galerkin state of the continuum density: coeffs[k](j, l) is the
// k-th theta-harmonic of the conditional density at frequency node omega_j
// and spatial node x_l = (l+1/2)/m_x.  coeffs[0] is pinned to 1/(2pi); the
// density is coeffs[0] + sum_{k>=1} (coeffs[k] e^{-ik theta} + conj).
struct MeanFieldState {
    int M = 0;
    int m_x = 0;
    Quadrature omega;  // weights include the frequency density
    double time = 0.0;
    std::vector<Eigen::MatrixXcd> coeffs;  // M+1 matrices, each size() x m_x

    int m_omega() const { return (int)omega.size(); }
    double x(int l) const { return (l + 0.5) / m_x; }
};

MeanFieldState init_meanfield(const InitialCondition& ic,
                              const FrequencyDistribution& dist, int M,
                              int m_omega, int m_x);

// First-harmonic mean field h(x_l) = 2pi int int W(x,y) rho_1 g domega dy.
Eigen::VectorXcd order_field(const MeanFieldState& st, const Graphon& g);

// Global order parameter |2pi <rho_1>|.
double meanfield_r(const MeanFieldState& st);

struct MeanFieldTrajectory {
    std::vector<double> times;
    std::vector<double> r;
    MeanFieldState final_state;
};

// Galerkin evolution d rho_k/dt = ik omega rho_k + (kK/2)(h rho_{k-1} -
// conj(h) rho_{k+1}), hard-truncated at M, integrated with an
// integrating-factor RK4 (the rotation ik omega is applied exactly, which
// keeps the far quadrature tails stable).  Requires dt <= 0.01.
MeanFieldTrajectory evolve(const MeanFieldState& st, const FrequencyDistribution& dist,
                           const Graphon& g, double K, double dt, double T,
                           int record_stride = 10);

// Linearized first harmonic dZ/dt = i omega Z + (K/2) P[Z]; returns the
// exponential growth rate fitted from log ||Z|| over the trailing half of
// the horizon (quadrature-weighted L2 norm on the lattice).
double linearized_evolve(const Eigen::MatrixXcd& z1, const FrequencyDistribution& dist,
                         const Graphon& g, double K, double dt, double T);

enum class Stability { Stable, UnstablePositiveBranch, UnstableNegativeBranch };

Stability stability_classify(const Graphon& g, const FrequencyDistribution& dist,
                             double K);

// Sample points are (theta, omega, xi) triples.
using PhasePoint = std::array<double, 3>;

// Max over a fixed dictionary of certified bounded-Lipschitz test functions
// of |<f>_samples - <f>_state|; a reproducible lower bound on the true
// bounded-Lipschitz distance, not the distance itself.
double bl_distance_proxy(const std::vector<PhasePoint>& samples,
                         const MeanFieldState& st);
double bl_distance_proxy(const std::vector<PhasePoint>& a,
                         const std::vector<PhasePoint>& b);

void save_checkpoint(const MeanFieldState& st, const std::string& path);
MeanFieldState load_checkpoint(const std::string& path);

}  // namespace km
