#include "km/spectra.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "km/util.hpp"

namespace km {

namespace {

void set_extremes(KernelSpectrum& s) {
    s.zeta_max.reset();
    s.zeta_min.reset();
    for (double z : s.eigenvalues) {
        if (z > 0.0 && (!s.zeta_max || z > *s.zeta_max)) s.zeta_max = z;
        if (z < 0.0 && (!s.zeta_min || z < *s.zeta_min)) s.zeta_min = z;
    }
}

// psi(x) = int x/(x^2+omega^2) g(omega) domega for x > 0, evaluated on the
// distribution's reference rule.  Decreasing in x, -> pi*g(0) as x -> 0+.
double psi(const FrequencyDistribution& dist, double x) {
    const Quadrature& q = dist.reference_rule();
    double s = 0.0;
    for (size_t j = 0; j < q.nodes.size(); ++j)
        s += q.weights[j] * x / (x * x + q.nodes[j] * q.nodes[j]);
    return s;
}

}  // namespace

KernelSpectrum analytic_spectrum(const Graphon& g, int k_max) {
    if (k_max < 0) throw ConfigError("k_max must be nonnegative");
    KernelSpectrum s;
    s.source = SpectrumSource::Analytic;
    switch (g.kind()) {
        case GraphonKind::Constant:
            if (g.p() != 0.0) s.eigenvalues.push_back(g.p());
            break;
        case GraphonKind::SmallWorld:
        case GraphonKind::RingIndicator: {
            const double p = g.kind() == GraphonKind::SmallWorld ? g.p() : 0.0;
            const double r = g.r();
            s.eigenvalues.push_back(2.0 * r + p - 4.0 * r * p);
            for (int k = 1; k <= k_max; ++k) {
                double zk = (1.0 - 2.0 * p) * std::sin(2.0 * pi * k * r) / (pi * k);
                s.eigenvalues.push_back(zk);
                s.eigenvalues.push_back(zk);  // cos and sin modes
            }
            break;
        }
        case GraphonKind::RingExp: {
            const double kappa = g.kappa();
            for (int k = 0; k <= k_max; ++k) {
                double base = 2.0 * kappa / (kappa * kappa + 4.0 * pi * pi * k * k);
                double zk = base * (k % 2 == 0 ? 1.0 - std::exp(-kappa / 2.0)
                                               : 1.0 + std::exp(-kappa / 2.0));
                s.eigenvalues.push_back(zk);
                if (k > 0) s.eigenvalues.push_back(zk);
            }
            break;
        }
        default:
            throw UnsupportedError(
                "analytic spectrum unavailable for graphon '" + g.spec() +
                "'; use nystrom_spectrum");
    }
    std::sort(s.eigenvalues.begin(), s.eigenvalues.end());
    set_extremes(s);
    return s;
}

KernelSpectrum nystrom_spectrum(const Graphon& g, int m) {
    if (m < 8) throw ConfigError("nystrom size must be at least 8");
    Eigen::MatrixXd A(m, m);
    for (int i = 0; i < m; ++i) {
        double xi = (i + 0.5) / m;
        for (int j = 0; j <= i; ++j) {
            double v = g(xi, (j + 0.5) / m) / m;
            A(i, j) = v;
            A(j, i) = v;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    KernelSpectrum s;
    s.source = SpectrumSource::Nystrom;
    s.nystrom_m = m;
    s.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + m);
    set_extremes(s);
    return s;
}

TransitionPoints transition_points(const KernelSpectrum& spec,
                                   const FrequencyDistribution& dist) {
    if (!dist.assumptions_met())
        throw ConfigError(
            "transition points need an even, unimodal, continuous frequency "
            "density; this distribution failed the shape probe");
    const double inf = std::numeric_limits<double>::infinity();
    TransitionPoints tp;
    tp.kc_plus = spec.zeta_max ? 2.0 / (pi * dist.g0() * *spec.zeta_max) : inf;
    tp.kc_minus = spec.zeta_min ? 2.0 / (pi * dist.g0() * *spec.zeta_min) : -inf;
    return tp;
}

double K_of_zeta(double zeta, const FrequencyDistribution& dist) {
    if (zeta == 0.0) throw std::invalid_argument("K_of_zeta: zeta must be nonzero");
    return 2.0 / (pi * dist.g0() * std::abs(zeta));
}

std::complex<double> D_lambda(const FrequencyDistribution& dist,
                              std::complex<double> lambda) {
    if (lambda.real() == 0.0)
        throw std::invalid_argument("D_lambda: Re(lambda) must be nonzero");
    const Quadrature& q = dist.reference_rule();
    std::complex<double> s = 0.0;
    for (size_t j = 0; j < q.nodes.size(); ++j)
        s += q.weights[j] / (lambda - std::complex<double>(0.0, q.nodes[j]));
    return s;
}

std::optional<double> solve_eigenvalue(const FrequencyDistribution& dist,
                                       double zeta, double K) {
    if (zeta == 0.0)
        throw std::invalid_argument("solve_eigenvalue: zeta must be nonzero");
    if (!(K > 0.0)) throw std::invalid_argument("solve_eigenvalue: K must be positive");
    const double target = 2.0 / (std::abs(zeta) * K);  // solve psi(x) = target, x > 0
    if (target >= pi * dist.g0()) return std::nullopt;  // K <= K(zeta): no eigenvalue

    double lo = 1e-12, hi = 1.0;
    while (psi(dist, hi) > target) {
        hi *= 2.0;
        if (hi > 1e12) throw NumericalError("solve_eigenvalue: bracket blew up");
    }
    // psi decreasing: psi(lo) > target >= psi(hi)
    for (int it = 0; it < 200 && hi - lo > 1e-10 * std::max(1.0, lo); ++it) {
        double mid = 0.5 * (lo + hi);
        (psi(dist, mid) > target ? lo : hi) = mid;
    }
    double x = 0.5 * (lo + hi);
    return zeta > 0.0 ? x : -x;
}

double discretized_T_abscissa(const Graphon& g, const FrequencyDistribution& dist,
                              double K, int m_omega, int m_x) {
    if (m_omega < 8 || m_x < 8) throw ConfigError("m_omega and m_x must be at least 8");
    if (K == 0.0) return 0.0;  // matrix is i*diag(omega)
    Quadrature q = dist.quadrature(m_omega);
    const int mw = (int)q.size();
    const int n = mw * m_x;
    Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < m_x; ++i) {
        double xi = (i + 0.5) / m_x;
        for (int j = 0; j < mw; ++j) {
            int row = i * mw + j;
            T(row, row) = std::complex<double>(0.0, q.nodes[j]);
            for (int ip = 0; ip < m_x; ++ip) {
                double wv = (K / 2.0) * g(xi, (ip + 0.5) / m_x) / m_x;
                for (int jp = 0; jp < mw; ++jp)
                    T(row, ip * mw + jp) += wv * q.weights[jp];
            }
        }
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(T, false);
    double a = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) a = std::max(a, es.eigenvalues()[k].real());
    return a;
}

double zeta_l1_bound(const Graphon& g) {
    switch (g.kind()) {
        case GraphonKind::Constant:
            return g.p();
        case GraphonKind::SmallWorld:
            return 2.0 * g.r() + g.p() - 4.0 * g.r() * g.p();
        case GraphonKind::RingIndicator:
            return 2.0 * g.r();
        case GraphonKind::RingExp:
            return (2.0 / g.kappa()) * (1.0 - std::exp(-g.kappa() / 2.0));
        case GraphonKind::Mollified:
            // the linear ramp is symmetric about the jump, so the mean is
            // that of the underlying step kernel
            return 2.0 * g.r() + g.p() - 4.0 * g.r() * g.p();
        case GraphonKind::Custom: {
            const int m = 1024;
            double s = 0.0;
            for (int i = 0; i < m; ++i) {
                double xi = (i + 0.5) / m;
                for (int j = 0; j < m; ++j) {
                    double v = g(xi, (j + 0.5) / m);
                    if (v < 0.0)
                        throw ConfigError("zeta_l1_bound needs a nonnegative graphon");
                    s += v;
                }
            }
            return s / (double(m) * m);
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace km
