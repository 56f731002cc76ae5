#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace km {

// Circle metric on coordinates in [0,1): d(x,y) = min(|x-y|, 1-|x-y|).
// This is d_S(2*pi*x, 2*pi*y) / (2*pi).
double circle_dist(double x, double y);

enum class GraphonKind {
    Constant,       // W(x,y) = p
    SmallWorld,     // W(x,y) = 1-p on circle_dist <= r, p otherwise
    RingIndicator,  // convolution kernel G_r = indicator of circle_dist <= r
    RingExp,        // convolution kernel G(d) = exp(-kappa d)
    Mollified,      // linear-ramp smoothing of a piecewise-constant kind
    Custom,
};

// A symmetric kernel on [0,1]^2 with optional Lipschitz metadata.
// Immutable after construction; safe to share across threads.
class Graphon {
  public:
    static Graphon constant(double p);
    static Graphon small_world(double p, double r);
    static Graphon ring_indicator(double r);
    static Graphon ring_exp(double kappa);
    static Graphon custom(std::function<double(double, double)> f,
                          std::optional<double> lipschitz = std::nullopt);

    // Evaluates W(x,y); throws std::invalid_argument outside [0,1]^2.
    double operator()(double x, double y) const;

    GraphonKind kind() const { return kind_; }
    double p() const { return p_; }
    double r() const { return r_; }
    double kappa() const { return kappa_; }
    // Half-width of the mollification ramp (Mollified kind only).
    double ramp_half_width() const { return ramp_; }

    // Finite Lipschitz constant, or nullopt for piecewise-constant kinds.
    std::optional<double> lipschitz() const { return lipschitz_; }

    // True for kinds whose kernel depends only on circle_dist(x, y).
    bool is_convolution() const;

    // Parses CLI specs: constant:p, small_world:p:r, ring_indicator:r, ring_exp:kappa.
    static Graphon parse(const std::string& spec);
    std::string spec() const { return spec_; }

  private:
    Graphon() = default;
    GraphonKind kind_ = GraphonKind::Custom;
    double p_ = 0, r_ = 0, kappa_ = 0, ramp_ = 0;
    std::optional<double> lipschitz_;
    std::function<double(double, double)> eval_;
    std::string spec_;

    friend Graphon mollify(const Graphon&, double);
};

// Lipschitz approximation of a piecewise-constant graphon: a linear ramp of
// total width eps^2 / (8*jump) across each discontinuity circle, giving
// L2 distance < eps (checked by quadrature at build time).
Graphon mollify(const Graphon& base, double eps);

enum class GridScheme { Uniform, IidUniform };

// The point set X_n assigning a coordinate in [0,1] to each oscillator.
struct NodeGrid {
    std::vector<double> points;  // uniform: i/n (1-indexed); iid: sorted draws
    GridScheme scheme = GridScheme::Uniform;
    std::optional<std::uint64_t> seed;

    int size() const { return static_cast<int>(points.size()); }
};

NodeGrid make_grid(int n, GridScheme scheme,
                   std::optional<std::uint64_t> seed = std::nullopt);

// Deterministic weighted graph: entries[i][j] = W(x_i, x_j).
struct WeightMatrix {
    Eigen::MatrixXd entries;
    int size() const { return static_cast<int>(entries.rows()); }
};

// W-random graph sample: symmetric 0/1 entries, zero diagonal.
struct AdjacencyMatrix {
    int n = 0;
    std::vector<std::uint8_t> entries;  // row-major n*n
    std::uint64_t seed = 0;

    std::uint8_t at(int i, int j) const { return entries[static_cast<std::size_t>(i) * n + j]; }
};

WeightMatrix build_weighted_graph(const Graphon& w, const NodeGrid& grid);
AdjacencyMatrix sample_random_graph(const Graphon& w, const NodeGrid& grid, std::uint64_t seed);

// Eq-(4.3)-style norms: sqrt(n^-2 sum A_ij^2) and sqrt(n^-1 sum v_i^2).
double norm_2n(const Eigen::MatrixXd& a);

// Plain-text serialization: first line n, then n whitespace-separated rows
// (17 significant digits, bit-exact round trip).
void write_matrix(std::ostream& os, const Eigen::MatrixXd& a);
Eigen::MatrixXd read_matrix(std::istream& is);
void write_adjacency(std::ostream& os, const AdjacencyMatrix& a);
AdjacencyMatrix read_adjacency(std::istream& is);
void write_grid(std::ostream& os, const NodeGrid& grid);   // one coordinate per line
std::vector<double> read_grid(std::istream& is);

}  // namespace km
