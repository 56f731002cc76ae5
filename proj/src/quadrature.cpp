#include "km/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace km {

Quadrature gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    // Golub-Welsch: eigen-decomposition of the Jacobi matrix.
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        jacobi(k, k - 1) = b;
        jacobi(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    Quadrature rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        rule.weights[i] = 2.0 * v0 * v0;
    }
    return rule;
}

Quadrature gauss_legendre(int n, double a, double b) {
    Quadrature base = gauss_legendre(n);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (int i = 0; i < n; ++i) {
        base.nodes[i] = mid + half * base.nodes[i];
        base.weights[i] *= half;
    }
    return base;
}

Quadrature composite_gauss_legendre(const std::vector<double>& breaks, int q) {
    if (breaks.size() < 2) throw std::invalid_argument("composite rule needs >= 2 breakpoints");
    Quadrature base = gauss_legendre(q);
    Quadrature rule;
    rule.nodes.reserve((breaks.size() - 1) * q);
    rule.weights.reserve((breaks.size() - 1) * q);
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
        const double mid = 0.5 * (breaks[p] + breaks[p + 1]);
        const double half = 0.5 * (breaks[p + 1] - breaks[p]);
        for (int i = 0; i < q; ++i) {
            rule.nodes.push_back(mid + half * base.nodes[i]);
            rule.weights.push_back(half * base.weights[i]);
        }
    }
    return rule;
}

std::vector<double> graded_symmetric_breaks(double u0, double u_max, double ratio) {
    std::vector<double> pos;
    pos.push_back(0.0);
    double u = u0;
    while (u < u_max) {
        pos.push_back(u);
        u *= ratio;
    }
    pos.push_back(u_max);
    std::vector<double> breaks;
    for (std::size_t i = pos.size(); i-- > 1;) breaks.push_back(-pos[i]);
    for (double v : pos) breaks.push_back(v);
    return breaks;
}

}  // namespace km
