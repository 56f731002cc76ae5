#pragma once

#include <memory>
#include <string>
#include <vector>

#include "km/graphon.hpp"

namespace km {

// Evaluates the pairwise interaction sums behind the phase-velocity field.
// With s_j = sin(theta_j), c_j = cos(theta_j), fills
//   S_i = sum_j W_ij s_j,   C_i = sum_j W_ij c_j,
// so that the force on oscillator i is (S_i c_i - C_i s_i) / n.
// Implementations must give the same per-row summation order regardless of
// thread count so results are reproducible.
class CouplingOp {
  public:
    virtual ~CouplingOp() = default;
    virtual int n() const = 0;
    virtual std::string name() const = 0;
    virtual void accumulate(const double* s, const double* c, double* S,
                            double* C) const = 0;
};

// Dense O(n^2) kernels over a weight matrix.  The parallel variant splits
// rows across threads; each row is summed in index order either way.
std::unique_ptr<CouplingOp> make_dense_serial(const WeightMatrix& w);
std::unique_ptr<CouplingOp> make_dense_parallel(const WeightMatrix& w);

// 0/1 adjacency, row-major bytes.
std::unique_ptr<CouplingOp> make_adjacency(const AdjacencyMatrix& a);

// W == p: force is p * r * sin(psi - theta_i), computed in O(n).
std::unique_ptr<CouplingOp> make_rank1(double p, int n);

// Ring-banded kernels (small-world / indicator graphons on the uniform
// grid): sliding circular window sums in O(n).
std::unique_ptr<CouplingOp> make_ring_band(const Graphon& g, int n);

// Picks the cheapest exact kernel for the weighted graph of `g` on `grid`;
// with allow_fast = false always returns the dense parallel kernel.
std::unique_ptr<CouplingOp> make_coupling(const Graphon& g, const NodeGrid& grid,
                                          bool allow_fast = true);

}  // namespace km
