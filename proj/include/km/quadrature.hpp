#pragma once

#include <vector>

namespace km {

// Nodes and weights of a quadrature rule for integrals against a weight
// function (sum w_j f(x_j) ~ int f w dx).
struct Quadrature {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

// Gauss-Legendre rule on [-1, 1], computed by Golub-Welsch.
Quadrature gauss_legendre(int n);

// Gauss-Legendre rule mapped to [a, b].
Quadrature gauss_legendre(int n, double a, double b);

// Composite Gauss-Legendre: q-point rule on each panel [breaks[i], breaks[i+1]].
Quadrature composite_gauss_legendre(const std::vector<double>& breaks, int q);

// Symmetric graded breakpoints for (-u_max, u_max): geometric refinement
// toward 0 starting at u0 with the given ratio.  Used to resolve the
// Poisson-kernel peak of resolvent integrands near the origin.
std::vector<double> graded_symmetric_breaks(double u0, double u_max, double ratio);

}  // namespace km
