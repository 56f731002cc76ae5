#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "km/frequency.hpp"
#include "km/graphon.hpp"

namespace km {

enum class SpectrumSource { Analytic, Nystrom };

// Eigenvalues of the kernel operator f -> int W(.,y) f(y) dy, plus the
// extremal values feeding the transition points.  zeta_max / zeta_min are
// empty when no eigenvalue of that sign exists (the "0+" / "0-" sentinels).
struct KernelSpectrum {
    std::vector<double> eigenvalues;  // ascending
    std::optional<double> zeta_max;
    std::optional<double> zeta_min;
    SpectrumSource source = SpectrumSource::Analytic;
    int nystrom_m = 0;
};

struct TransitionPoints {
    double kc_plus;   // +inf when zeta_max is the sentinel
    double kc_minus;  // -inf when zeta_min is the sentinel
};

KernelSpectrum analytic_spectrum(const Graphon& g, int k_max = 64);
KernelSpectrum nystrom_spectrum(const Graphon& g, int m);

TransitionPoints transition_points(const KernelSpectrum& spec,
                                   const FrequencyDistribution& dist);

// Onset coupling of the eigenvalue branch for a kernel eigenvalue zeta.
double K_of_zeta(double zeta, const FrequencyDistribution& dist);

// D(lambda) = int g(omega) / (lambda - i omega) domega, Re(lambda) != 0.
std::complex<double> D_lambda(const FrequencyDistribution& dist,
                              std::complex<double> lambda);

// Real point eigenvalue of the linearization on the branch of zeta, or empty
// when K is at or below the onset coupling.  Requires K > 0.
std::optional<double> solve_eigenvalue(const FrequencyDistribution& dist,
                                       double zeta, double K);

// Spectral abscissa of the (m_omega * m_x)-dim matrix discretizing the
// linearized operator (frequency quadrature x uniform midpoint grid in x).
double discretized_T_abscissa(const Graphon& g, const FrequencyDistribution& dist,
                              double K, int m_omega, int m_x);

// int int W dx dy; a lower bound on zeta_max for nonnegative kernels.
double zeta_l1_bound(const Graphon& g);

}  // namespace km
